"""Exact convolution calculus on refined apartments of Bruhat-Tits buildings.

The package has three layers:

* a combinatorial layer (``root_data``, ``apartment``, ``chamber_geometry``)
  that enumerates refined facets with exact rational arithmetic,
* a symbolic layer (``mp_model``, ``characters``, ``convolution``) for
  filtration quotients, cuspidal characters and the idempotent calculus,
* an independent oracle (``oracle``) that realizes everything as truncated
  p-adic matrix groups and convolves exactly with cyclotomic coefficients.

A FastAPI service (``mpconv.service``) exposes the operations; the ``mpconv``
command line tool is a thin client of that service.
"""

__version__ = "0.1.0"
