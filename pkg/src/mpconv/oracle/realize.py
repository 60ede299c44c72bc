"""Realization of symbolic idempotents as exact group-algebra elements.

The bridge is coordinate honest: thresholds come from the valuation
formulas at the facet's apartment points, characters evaluate through
entry reading of exact matrices, and every element carries its invariance
groups for later convolution.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Optional, Sequence

from ..apartment import Facet, Window
from ..linalg import Mat, identity, mat_inv, mat_mul, vec
from ..mp_model import _root_to_entry, quotient_lines
from .algebra import GroupAlgebraElement, character_idempotent, unit_idempotent
from .cyclotomic import Cyclo
from .groups import FilteredGroup, sl_thresholds, val_p

_SIZE = {"A1": 2, "A2": 3, "A3": 4}


def fraction_mod(x: Fraction, p: int) -> int:
    den = x.denominator % p
    if den == 0:
        raise ValueError("denominator divisible by p")
    return (x.numerator % p) * pow(den, -1, p) % p


class Realizer:
    """Realizes facet data of one window (frame: one apartment chart)."""

    def __init__(self, window: Window, r: Fraction, p: int, frame: Optional[Mat] = None):
        self.window = window
        self.r = Fraction(r)
        self.p = p
        self.n = _SIZE[window.system.label]
        self.frame = frame if frame is not None else identity(self.n)
        self._group_cache: dict = {}
        self._orbit_cache: dict = {}
        self._char_cache: dict = {}

    # -- groups -----------------------------------------------------------

    def group_at_points(self, points: Sequence, strict: bool, depth=None) -> FilteredGroup:
        r = self.r if depth is None else Fraction(depth)
        key = (tuple(tuple(x) for x in points), r, strict)
        got = self._group_cache.get(key)
        if got is None:
            t = sl_thresholds(self.n, [tuple(x) for x in points], r, strict)
            got = FilteredGroup(self.p, self.frame, t)
            self._group_cache[key] = got
        return got

    def group(self, facet: Facet, strict: bool, depth=None) -> FilteredGroup:
        return self.group_at_points(facet.vertices, strict, depth)

    # -- elements ---------------------------------------------------------

    def plain(self, facet: Facet, strict: bool = True, depth=None) -> GroupAlgebraElement:
        return unit_idempotent(self.p, self.group(facet, strict, depth))

    def line_entries(self, facet: Facet):
        quot = quotient_lines(self.window, facet, self.r, self.p)
        return quot, [(_root_to_entry(l.gradient), l.constant) for l in quot.lines]

    def coords_of(self, facet: Facet, y: Mat) -> tuple:
        """Quotient coordinates of an element of the depth-r facet group."""
        quot, entries = self.line_entries(facet)
        w = mat_mul(mat_mul(mat_inv(self.frame), y), self.frame)
        p, r = self.p, self.r
        out = []
        for (i, j), c in entries:
            val = (w[i][j] - (1 if i == j else 0)) / (Fraction(p) ** int(c))
            out.append(fraction_mod(val, p))
        if quot.torus_rank:
            diffs = [
                fraction_mod((w[i][i] - 1) / (Fraction(p) ** int(r)), p)
                for i in range(self.n)
            ]
            acc = 0
            for k in range(self.n - 1):
                acc = (acc + diffs[k]) % p
                out.append(acc)
        return tuple(out)

    def char_element(self, facet: Facet, coeffs: Sequence[int]) -> GroupAlgebraElement:
        """e_{E,A} for the character with the given quotient coefficients."""
        coeffs = tuple(int(c) % self.p for c in coeffs)
        cached = self._char_cache.get((facet.key, coeffs))
        if cached is not None:
            return cached.copy()
        group_r = self.group(facet, strict=False)
        group_rp = self.group(facet, strict=True)

        def value_of(rep: Mat) -> int:
            coords = self.coords_of(facet, rep)
            return sum(a * c for a, c in zip(coeffs, coords)) % self.p

        out = character_idempotent(self.p, group_r, group_rp, value_of)
        self._char_cache[(facet.key, coeffs)] = out
        return out.copy()

    def char_sum_element(self, facet: Facet, coeff_set: Iterable) -> GroupAlgebraElement:
        """Sum of character idempotents over a set of coefficient vectors."""
        out = None
        for coeffs in sorted(coeff_set):
            el = self.char_element(facet, coeffs)
            out = el if out is None else out + el
        if out is None:
            out = GroupAlgebraElement.zero(self.p, self.group(facet, strict=True))
        return out

    def ad_orbit(self, facet: Facet, coeffs: Sequence[int], depth_zero_extra=0) -> set:
        """Orbit of quotient coefficients under the level-zero group.

        Conjugation is by honest generators of the parahoric at the facet
        (depth-zero pattern in this frame), acting on coordinates through
        exact matrix conjugation.
        """
        okey = (facet.key, tuple(int(c) % self.p for c in coeffs))
        got = self._orbit_cache.get(okey)
        if got is not None:
            return got
        level0 = self.group(facet, strict=False, depth=Fraction(depth_zero_extra))
        gens = level0.generators()
        from ..mp_model import QuotientModel

        model = QuotientModel(self.window, facet, self.r, self.p)
        finv = mat_inv(self.frame)
        mats = []
        for g in gens:
            unframed = mat_mul(mat_mul(finv, g), self.frame)
            mats.append(model.action_matrix(unframed))
        q = self.p
        seen = {tuple(int(c) % q for c in coeffs)}
        frontier = list(seen)
        while frontier:
            nxt = []
            for cur in frontier:
                for m in mats:
                    img = tuple(
                        sum(cur[i] * m[i][j] for i in range(len(cur))) % q
                        for j in range(len(cur))
                    )
                    if img not in seen:
                        seen.add(img)
                        nxt.append(img)
            frontier = nxt
        self._orbit_cache[okey] = seen
        return seen

    def transport_coeffs(
        self, src: Facet, dst: Facet, h: Mat, coeffs: Sequence[int]
    ) -> tuple:
        """Coefficients of A o Ad(h)^{-1} at dst for A at src (unframed h)."""
        from ..mp_model import QuotientModel

        model_src = QuotientModel(self.window, src, self.r, self.p)
        model_dst = QuotientModel(self.window, dst, self.r, self.p)
        hinv = mat_inv(h)
        out = []
        for k in range(model_dst.dim):
            basis = [0] * model_dst.dim
            basis[k] = 1
            mk = model_dst.matrix_of(basis)
            back = mat_mul(mat_mul(hinv, mk), h)
            coords = model_src.coords_of(back)
            out.append(sum(int(a) * c for a, c in zip(coeffs, coords)) % self.p)
        return tuple(out)
