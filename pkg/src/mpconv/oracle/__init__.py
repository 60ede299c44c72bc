"""Independent ground truth: truncated p-adic matrix groups and exact
group-algebra convolution with cyclotomic coefficients."""

from .cyclotomic import Cyclo
from .groups import FilteredGroup, sl_thresholds
from .algebra import GroupAlgebraElement, convolve

__all__ = [
    "Cyclo",
    "FilteredGroup",
    "GroupAlgebraElement",
    "convolve",
    "sl_thresholds",
]
