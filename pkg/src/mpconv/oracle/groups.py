"""Congruence-pattern subgroups of SL_n over a p-adic field, exactly.

A filtration group is (frame) * (1 + L_T) * (frame)^{-1} intersected with
SL_n, where L_T is the lattice of matrices whose (i,j) entry has valuation
at least T_ij.  For type A this matches the Moy-Prasad groups of points and
facets, with thresholds read off the valuation inequalities directly.
Right cosets are keyed by exact Hermite-reduced residues, column by column.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Optional, Sequence

from ..linalg import Mat, Vec, identity, mat, mat_inv, mat_mul, vec


@lru_cache(maxsize=None)
def _inv_cached(m: Mat) -> Mat:
    return mat_inv(m)


def val_p(x: Fraction, p: int) -> int:
    """p-adic valuation of a nonzero rational; raises on zero."""
    if x == 0:
        raise ValueError("valuation of zero")
    num, den = x.numerator, x.denominator
    v = 0
    while num % p == 0:
        num //= p
        v += 1
    while den % p == 0:
        den //= p
        v -= 1
    return v


def val_at_least(x: Fraction, p: int, bound: Fraction) -> bool:
    return x == 0 or val_p(x, p) >= bound


def _ceil(x: Fraction) -> int:
    return -((-Fraction(x).numerator) // Fraction(x).denominator)


def sl_thresholds(n: int, points: Sequence[Vec], r: Fraction, strict: bool):
    """Entry-valuation thresholds for the depth-r group at a facet of SL_n.

    Points are apartment coordinates in the simple-root pairing (coordinate k
    is the value of the k-th simple root); the (i,j) threshold is the ceiling
    of r - (a_i - a_j) over the facet, strict on constant entries for r+.
    """
    r = Fraction(r)
    diag_profiles = []
    for x in points:
        a = [Fraction(0)] * n
        for i in range(n - 2, -1, -1):
            a[i] = a[i + 1] + x[i]
        diag_profiles.append(a)
    torus = Fraction(_ceil(r))
    if strict and torus == r:
        torus += 1
    t = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            if i == j:
                t[i][j] = torus
                continue
            vals = [r - (a[i] - a[j]) for a in diag_profiles]
            need = max(vals)
            c = Fraction(_ceil(need))
            if strict and min(vals) == max(vals) and c == need:
                c += 1
            t[i][j] = c
    return tuple(tuple(row) for row in t)


_TRANSVERSAL_CACHE: dict = {}


@dataclass(frozen=True)
class FilteredGroup:
    """(frame (1 + L_T) frame^{-1}) intersected with SL_n."""

    p: int
    frame: Mat
    thresholds: tuple  # n x n Fractions with integer values

    @property
    def n(self) -> int:
        return len(self.thresholds)

    def frame_inv(self) -> Mat:
        return _inv_cached(self.frame)

    def contains_matrix(self, y: Mat) -> bool:
        w = mat_mul(mat_mul(self.frame_inv(), y), self.frame)
        for i in range(self.n):
            for j in range(self.n):
                delta = w[i][j] - (1 if i == j else 0)
                if not val_at_least(delta, self.p, self.thresholds[i][j]):
                    return False
        return _det(y) == 1

    def contains_group(self, other: "FilteredGroup") -> bool:
        """Lattice containment: every basis direction of other fits."""
        cinv = self.frame_inv()
        n = self.n
        p = self.p
        for i in range(n):
            for j in range(n):
                basis = [[Fraction(0)] * n for _ in range(n)]
                basis[i][j] = Fraction(p) ** int(other.thresholds[i][j])
                m = mat_mul(mat_mul(other.frame, mat(basis)), _inv_cached(other.frame))
                w = mat_mul(mat_mul(cinv, m), self.frame)
                for a in range(n):
                    for b in range(n):
                        if not val_at_least(w[a][b], p, self.thresholds[a][b]):
                            return False
        return True

    def same_group(self, other: "FilteredGroup") -> bool:
        return self.contains_group(other) and other.contains_group(self)

    def meas_exponent(self) -> int:
        """log_q of 1/meas with the entry-lattice convention."""
        n = self.n
        torus = self.thresholds[0][0]
        total = sum(
            int(self.thresholds[i][j]) for i in range(n) for j in range(n) if i != j
        )
        return total + (n - 1) * int(torus)

    def meas(self) -> Fraction:
        return Fraction(self.p) ** (-self.meas_exponent())

    def intersect_same_frame(self, other: "FilteredGroup") -> "FilteredGroup":
        if self.frame != other.frame:
            raise ValueError("intersection needs a common frame")
        n = self.n
        t = tuple(
            tuple(max(self.thresholds[i][j], other.thresholds[i][j]) for j in range(n))
            for i in range(n)
        )
        return FilteredGroup(self.p, self.frame, t)

    def key(self, y: Mat) -> tuple:
        """Canonical identifier of the right coset y * self."""
        v = mat_mul(y, self.frame)
        n, p = self.n, self.p
        out = []
        for j in range(n):
            basis = []
            for i in range(n):
                col = [v[a][i] * Fraction(p) ** int(self.thresholds[i][j]) for a in range(n)]
                basis.append(col)
            target = [v[a][j] for a in range(n)]
            out.extend(plocal_residue(basis, target, p))
        return tuple(out)

    def coordinate_factors(self, sub: "FilteredGroup"):
        """(entry, base threshold, range) coordinates between self and sub."""
        if self.frame != sub.frame:
            raise ValueError("transversal needs a common frame")
        n = self.n
        coords = []
        for i in range(n):
            for j in range(n):
                if i == j:
                    continue
                lo, hi = int(self.thresholds[i][j]), int(sub.thresholds[i][j])
                if hi > lo:
                    coords.append(("root", i, j, lo, hi - lo))
        lo, hi = int(self.thresholds[0][0]), int(sub.thresholds[0][0])
        if hi > lo:
            for k in range(n - 1):
                coords.append(("torus", k, k + 1, lo, hi - lo))
        return coords

    def transversal_mod(self, sub: "FilteredGroup") -> list[Mat]:
        """Right-coset representatives of self modulo a same-frame subgroup.

        Ordered-product coordinates; valid for positive-depth patterns where
        the factorization is unique.
        """
        cached = _TRANSVERSAL_CACHE.get((self, sub))
        if cached is not None:
            return cached
        if int(self.thresholds[0][0]) < 1:
            raise ValueError("transversal enumeration needs positive depth")
        coords = self.coordinate_factors(sub)
        p, n = self.p, self.n
        reps = [identity(n)]
        for kind, i, j, base, width in coords:
            new = []
            for u in range(p**width):
                factor = _coordinate_matrix(kind, i, j, base, u, p, n)
                for repm in reps:
                    new.append(mat_mul(repm, factor))
            reps = new
        c = self.frame
        cinv = self.frame_inv()
        out = [mat_mul(mat_mul(c, repm), cinv) for repm in reps]
        _TRANSVERSAL_CACHE[(self, sub)] = out
        return out

    def generators(self) -> list[Mat]:
        """Framed generators of the group (one per coordinate direction)."""
        p, n = self.p, self.n
        out = []
        for i in range(n):
            for j in range(n):
                if i != j:
                    out.append(
                        _coordinate_matrix("root", i, j, int(self.thresholds[i][j]), 1, p, n)
                    )
        for k in range(n - 1):
            out.append(
                _coordinate_matrix("torus", k, k + 1, int(self.thresholds[0][0]), 1, p, n)
            )
        c, cinv = self.frame, self.frame_inv()
        return [mat_mul(mat_mul(c, g), cinv) for g in out]


def _coordinate_matrix(kind: str, i: int, j: int, base: int, u: int, p: int, n: int) -> Mat:
    m = [[Fraction(1 if a == b else 0) for b in range(n)] for a in range(n)]
    if kind == "root":
        m[i][j] += Fraction(u) * Fraction(p) ** base
    else:
        if base == 0:
            # residue units: use a generator of F_p^* instead of 1 + u
            unit = Fraction(_primitive_root(p)) ** u
        else:
            unit = 1 + Fraction(u) * Fraction(p) ** base
        m[i][i] = unit
        m[j][j] = Fraction(1) / unit
    return tuple(tuple(row) for row in m)


def _primitive_root(p: int) -> int:
    if p == 2:
        return 1
    for g in range(2, p):
        seen = set()
        x = 1
        for _ in range(p - 1):
            x = (x * g) % p
            seen.add(x)
        if len(seen) == p - 1:
            return g
    raise ValueError("no primitive root")


def p_residue(x: Fraction, p: int, v: int) -> Fraction:
    """Canonical representative of x modulo p^v Z_(p)."""
    if x == 0:
        return Fraction(0)
    num, den = x.numerator, x.denominator
    d = 0
    while den % p == 0:
        den //= p
        d += 1
    if v + d <= 0:
        return Fraction(0)
    mod = p ** (v + d)
    r = (num % mod) * pow(den % mod, -1, mod) % mod
    return Fraction(r, p**d)


def plocal_residue(basis_vectors, target, p: int) -> tuple:
    """Canonical residue of a vector modulo a full-rank Z_(p)-lattice.

    Pivoting is by p-adic valuation only, so denominators coprime to p are
    handled as units; equal cosets reduce to equal tuples regardless of the
    presented basis.
    """
    n = len(target)
    gens = [[Fraction(x) for x in g] for g in basis_vectors]
    rows = []
    for i in range(n):
        cand = [g for g in gens if g[i] != 0]
        zs = [g for g in gens if g[i] == 0]
        if not cand:
            raise ValueError("lattice not full rank")
        piv = min(cand, key=lambda g: val_p(g[i], p))
        rest = [g for g in cand if g is not piv]
        for g in rest:
            f = g[i] / piv[i]
            zs.append([a - f * b for a, b in zip(g, piv)])
        v = val_p(piv[i], p)
        unit = piv[i] / Fraction(p) ** v
        piv = [a / unit for a in piv]
        rows.append((i, v, piv))
        gens = zs
    out = [Fraction(x) for x in target]
    for i, v, piv in rows:
        res = p_residue(out[i], p, v)
        c = (out[i] - res) / piv[i]
        out = [a - c * b for a, b in zip(out, piv)]
    return tuple(out)


def _det(m: Mat) -> Fraction:
    n = len(m)
    if n == 1:
        return m[0][0]
    if n == 2:
        return m[0][0] * m[1][1] - m[0][1] * m[1][0]
    if n == 3:
        return (
            m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
        )
    raise ValueError("determinant implemented for n <= 3")
