"""Root systems, Weyl groups, and true/virtual affine roots.

Split systems (A1, A2, A3, C2, G2) are realized in fundamental-coweight
coordinates: the j-th coordinate of a point x is the value of the j-th
simple root on x, so a root is the integer row vector of its simple-root
coefficients.  The non-reduced echelonnage systems (BC1, BC2) use standard
orthonormal coordinates with table-driven affine constants.

True affine roots are pairs (gradient, constant) with the constant drawn
from a per-gradient set of offsets modulo 1; virtual affine roots at level N
scale the constants by 1/N.  All arithmetic is exact rational.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Optional, Sequence

from .linalg import (
    Mat,
    Vec,
    dot,
    identity,
    mat,
    mat_inv,
    mat_mul,
    mat_vec,
    solve,
    transpose,
    vadd,
    vec,
    vsub,
)


class UnsupportedSystemError(ValueError):
    """Raised for root-system labels outside the supported list."""


_CARTAN = {
    "A1": [[2]],
    "A2": [[2, -1], [-1, 2]],
    "A3": [[2, -1, 0], [-1, 2, -1], [0, -1, 2]],
    # alpha short, beta long
    "C2": [[2, -1], [-2, 2]],
    "G2": [[2, -1], [-3, 2]],
}

_ALIASES = {
    "B2": "C2",
    "B2/C2": "C2",
    "BC1-ECHELONNAGE": "BC1",
    "BC2-ECHELONNAGE": "BC2",
    "BCN-ECHELONNAGE": "BC1",
}

_WEYL_ORDER = {"A1": 2, "A2": 6, "A3": 24, "C2": 8, "G2": 12, "BC1": 2, "BC2": 8}

HALF = Fraction(1, 2)


@dataclass(frozen=True)
class VirtualAffineRoot:
    """Affine functional <gradient, x> + constant; gradient () means constant."""

    gradient: Vec
    constant: Fraction

    def __call__(self, x: Vec) -> Fraction:
        if not self.gradient:
            return self.constant
        return dot(self.gradient, x) + self.constant

    @property
    def is_constant(self) -> bool:
        return all(g == 0 for g in self.gradient)

    def negate(self) -> "VirtualAffineRoot":
        return VirtualAffineRoot(tuple(-g for g in self.gradient), -self.constant)

    def shift(self, delta: Fraction) -> "VirtualAffineRoot":
        return VirtualAffineRoot(self.gradient, self.constant + delta)

    def sort_key(self):
        return (self.gradient, self.constant)


@dataclass(frozen=True)
class AffineMotion:
    """Element (w, t): x -> w x + t of the (extended) affine Weyl group."""

    matrix: Mat
    translation: Vec

    def apply_point(self, x: Vec) -> Vec:
        return vadd(mat_vec(self.matrix, x), self.translation)

    def apply_functional(self, psi: VirtualAffineRoot) -> VirtualAffineRoot:
        # psi' = psi o m^{-1}
        winv = mat_inv(self.matrix)
        grad = tuple(dot(psi.gradient, col) for col in transpose(winv))
        const = psi.constant - dot(grad, self.translation)
        return VirtualAffineRoot(grad, const)

    def compose(self, other: "AffineMotion") -> "AffineMotion":
        # self o other
        return AffineMotion(
            mat_mul(self.matrix, other.matrix),
            vadd(mat_vec(self.matrix, other.translation), self.translation),
        )

    def inverse(self) -> "AffineMotion":
        winv = mat_inv(self.matrix)
        return AffineMotion(winv, tuple(-x for x in mat_vec(winv, self.translation)))


class RootSystem:
    """Exact data for one supported (affine) root system."""

    def __init__(
        self,
        label: str,
        rank: int,
        roots: Sequence[Vec],
        weyl: Sequence[Mat],
        simple_roots: Sequence[Vec],
        simple_coroots: Sequence[Vec],
        offsets: dict[Vec, frozenset],
        reduced: bool,
    ):
        self.label = label
        self.rank = rank
        self.roots = tuple(sorted(roots))
        self.simple_roots = tuple(simple_roots)
        self.simple_coroots = tuple(simple_coroots)
        self.weyl_elements = tuple(weyl)
        self.offsets = offsets
        self.reduced = reduced
        self.positive_roots = tuple(g for g in self.roots if g > tuple([0] * rank))
        gram = [[Fraction(0)] * rank for _ in range(rank)]
        for g in self.roots:
            for i in range(rank):
                for j in range(rank):
                    gram[i][j] += g[i] * g[j]
        self.gram: Mat = mat(gram)
        self.gram_inv: Mat = mat_inv(self.gram)
        self._simple_mat_inv = mat_inv(mat(simple_roots))
        self._winv_t = {w: transpose(mat_inv(w)) for w in self.weyl_elements}
        lengths = {g: self.dual_norm(g) for g in self.roots}
        shortest = min(lengths.values())
        self.short_roots = tuple(g for g in self.roots if lengths[g] == shortest)
        self.highest_root = max(self.positive_roots, key=lambda g: (self.height(g), g))
        self.highest_root_height = self.height(self.highest_root)
        self.fundamental_coweights = tuple(
            solve(mat(simple_roots), vec([1 if i == j else 0 for j in range(rank)]))
            for i in range(rank)
        )

    # -- basic queries -------------------------------------------------

    def gradient_index(self, gradient: Vec) -> int:
        """Index into roots, or -1 for the zero gradient."""
        if all(g == 0 for g in gradient):
            return -1
        return self.roots.index(gradient)

    def height(self, gradient: Vec) -> Fraction:
        coeffs = mat_vec(transpose(self._simple_mat_inv), gradient)
        return sum(coeffs, Fraction(0))

    def dual_norm(self, gradient: Vec) -> Fraction:
        """Squared length of a gradient in the dual of the invariant form."""
        return dot(gradient, mat_vec(self.gram_inv, gradient))

    def coroot(self, gradient: Vec) -> Vec:
        """Metric-dual coroot: <gradient, coroot> = 2."""
        gv = mat_vec(self.gram_inv, gradient)
        return tuple(Fraction(2) * x / self.dual_norm(gradient) for x in gv)

    def is_divisible_gradient(self, gradient: Vec) -> bool:
        half = tuple(g / 2 for g in gradient)
        return half in self.roots

    # -- affine constants ----------------------------------------------

    def _offsets_for(self, gradient: Vec) -> frozenset:
        if all(g == 0 for g in gradient):
            return frozenset([Fraction(0)])
        return self.offsets[gradient]

    def is_true_constant(self, gradient: Vec, c: Fraction) -> bool:
        return (c - int(c)) % 1 in self._offsets_for(gradient)

    def is_virtual_constant(self, gradient: Vec, c: Fraction, refinement: int) -> bool:
        return self.is_true_constant(gradient, c * refinement)

    def true_ceiling(self, gradient: Vec, c: Fraction, strict: bool = False) -> Fraction:
        """Smallest true affine constant >= c (or > c when strict)."""
        best = None
        for off in self._offsets_for(gradient):
            k = c - off
            n = k.numerator // k.denominator  # floor
            cand = off + n
            if cand < c or (strict and cand == c):
                cand += 1
            if best is None or cand < best:
                best = cand
        return best

    def true_constants_in(self, gradient: Vec, lo: Fraction, hi: Fraction) -> list[Fraction]:
        """All true constants c with lo <= c <= hi, ascending."""
        out = []
        c = self.true_ceiling(gradient, lo)
        while c <= hi:
            out.append(c)
            c = self.true_ceiling(gradient, c, strict=True)
        return out

    def count_true_constants(self, gradient: Vec, lo: Fraction, hi: Fraction) -> int:
        """Number of true constants in [lo, hi) — exact index bookkeeping."""
        n = 0
        c = self.true_ceiling(gradient, lo)
        while c < hi:
            n += 1
            c = self.true_ceiling(gradient, c, strict=True)
        return n

    def virtual_constants_in(
        self, gradient: Vec, lo: Fraction, hi: Fraction, refinement: int
    ) -> list[Fraction]:
        return [
            c / refinement
            for c in self.true_constants_in(gradient, lo * refinement, hi * refinement)
        ]

    def ceiling_lift(self, psi: VirtualAffineRoot) -> VirtualAffineRoot:
        """The true affine root defining the same filtration group."""
        if psi.is_constant:
            c = psi.constant
            n = -((-c.numerator) // c.denominator)  # ceil
            return VirtualAffineRoot(psi.gradient, Fraction(n))
        return VirtualAffineRoot(psi.gradient, self.true_ceiling(psi.gradient, psi.constant))

    def is_divisible_virtual(self, psi: VirtualAffineRoot, refinement: int) -> bool:
        if psi.is_constant:
            return False
        half_grad = tuple(g / 2 for g in psi.gradient)
        if half_grad not in self.roots:
            return False
        return self.is_virtual_constant(half_grad, psi.constant / 2, refinement)

    # -- Weyl / affine action --------------------------------------------

    def simple_systems(self) -> list[frozenset]:
        out = {
            frozenset(self.weyl_on_functional(w, a) for a in self.simple_roots)
            for w in self.weyl_elements
        }
        return sorted(out, key=lambda s: tuple(sorted(s)))

    def weyl_on_functional(self, w: Mat, gradient: Vec) -> Vec:
        """Image of a root functional under w (as gradient of psi o w^{-1})."""
        winv_t = self._winv_t.get(w)
        if winv_t is None:
            winv_t = transpose(mat_inv(w))
        return mat_vec(winv_t, gradient)

    def in_coroot_lattice(self, t: Vec) -> bool:
        coeffs = solve(transpose(mat(self.simple_coroots)), t)
        return all(c.denominator == 1 for c in coeffs)

    def motion(self, w: Mat, t: Vec) -> AffineMotion:
        if not self.in_coroot_lattice(t):
            raise ValueError("translation not in the coroot lattice")
        return AffineMotion(w, t)

    def positive_for(self, delta: Iterable[Vec], gradient: Vec) -> bool:
        """Is gradient a positive root for the simple system delta?"""
        coeffs = solve(transpose(mat(list(delta))), gradient)
        if all(c >= 0 for c in coeffs):
            return True
        if all(c <= 0 for c in coeffs):
            return False
        raise ValueError("gradient not in the span pattern of a root")

    def longest_element(self, theta: Sequence[Vec]) -> Mat:
        """Longest element of the parabolic Weyl subgroup generated by theta."""
        if not theta:
            return identity(self.rank)
        gens = [self.reflection_matrix(a) for a in theta]
        seen = {identity(self.rank)}
        frontier = [identity(self.rank)]
        while frontier:
            new = []
            for m in frontier:
                for g in gens:
                    cand = mat_mul(g, m)
                    if cand not in seen:
                        seen.add(cand)
                        new.append(cand)
            frontier = new
        theta_pos = [g for g in self.positive_roots if self._in_span(theta, g)]
        for w in seen:
            if all(self.weyl_on_functional(w, g) not in self.positive_roots for g in theta_pos):
                return w
        raise RuntimeError("no longest element found")

    def _in_span(self, theta: Sequence[Vec], g: Vec) -> bool:
        rows = [list(a) for a in theta]
        from .linalg import rank as _rank

        return _rank(rows + [list(g)]) == _rank(rows)

    def reflection_matrix(self, gradient: Vec) -> Mat:
        """Linear reflection s_gradient(x) = x - gradient(x) * coroot."""
        cr = self.coroot(gradient)
        n = self.rank
        return tuple(
            tuple(
                (Fraction(1) if i == j else Fraction(0)) - cr[i] * gradient[j]
                for j in range(n)
            )
            for i in range(n)
        )


def _generate_weyl(gens: list[Mat]) -> list[Mat]:
    seen = {identity(len(gens[0]))}
    frontier = list(seen)
    while frontier:
        new = []
        for m in frontier:
            for g in gens:
                cand = mat_mul(g, m)
                if cand not in seen:
                    seen.add(cand)
                    new.append(cand)
        frontier = new
    return sorted(seen)


def _split_system(label: str) -> RootSystem:
    cartan = _CARTAN[label]
    rank = len(cartan)
    simple_roots = [vec([1 if j == i else 0 for j in range(rank)]) for i in range(rank)]
    simple_coroots = [vec([cartan[k][j] for k in range(rank)]) for j in range(rank)]
    refl = []
    for i in range(rank):
        m = [[Fraction(1 if a == b else 0) for b in range(rank)] for a in range(rank)]
        for k in range(rank):
            m[k][i] -= simple_coroots[i][k]
        refl.append(mat(m))
    weyl = _generate_weyl(refl)
    # roots = orbit of the simple roots under the contragredient action
    roots = set()
    frontier = set(simple_roots)
    while frontier:
        new = set()
        for g in frontier:
            if g in roots:
                continue
            roots.add(g)
            for m in refl:
                minv = mat_inv(m)
                img = tuple(dot(g, col) for col in transpose(minv))
                if img not in roots:
                    new.add(img)
        frontier = new
    offsets = {g: frozenset([Fraction(0)]) for g in roots}
    return RootSystem(label, rank, sorted(roots), weyl, simple_roots, simple_coroots, offsets, True)


def _bc_system(label: str, table: Optional[dict] = None) -> RootSystem:
    rank = 1 if label == "BC1" else 2
    roots = set()
    for i in range(rank):
        e = [Fraction(0)] * rank
        e[i] = Fraction(1)
        roots.add(tuple(e))
        roots.add(tuple(-x for x in e))
        roots.add(tuple(2 * x for x in e))
        roots.add(tuple(-2 * x for x in e))
    if rank == 2:
        for s1 in (1, -1):
            for s2 in (1, -1):
                roots.add((Fraction(s1), Fraction(s2)))
    if rank == 1:
        simple_roots = [vec([1])]
        refl = [mat([[-1]])]
    else:
        simple_roots = [vec([1, -1]), vec([0, 1])]
        refl = [
            mat([[0, 1], [1, 0]]),
            mat([[1, 0], [0, -1]]),
        ]
    weyl = _generate_weyl(refl)
    simple_coroots = [vec([2 * x / dot(a, a) for x in a]) for a in simple_roots]
    offsets = {}
    for g in roots:
        if any(abs(x) == 2 for x in g):
            offsets[g] = frozenset([HALF])
        else:
            offsets[g] = frozenset([Fraction(0), HALF])
    if table:
        for g, offs in table.items():
            offsets[g] = frozenset(Fraction(o) % 1 for o in offs)
    return RootSystem(label, rank, sorted(roots), weyl, simple_roots, simple_coroots, offsets, False)


def load_offset_table(path: str) -> dict[Vec, list[Fraction]]:
    """Read a {gradient, offsets[]} JSON list into a constants table."""
    with open(path) as fh:
        raw = json.load(fh)
    table = {}
    for entry in raw:
        g = vec(Fraction(x) for x in entry["gradient"])
        table[g] = [Fraction(o) for o in entry["offsets"]]
    return table


@lru_cache(maxsize=None)
def build_root_system(label: str, rank: Optional[int] = None) -> RootSystem:
    """Construct a supported root system; raises UnsupportedSystemError otherwise."""
    key = label.upper()
    key = _ALIASES.get(key, key)
    if key not in _WEYL_ORDER:
        raise UnsupportedSystemError(f"unsupported system {label!r}")
    system = _bc_system(key) if key.startswith("BC") else _split_system(key)
    if rank is not None and rank != system.rank:
        raise UnsupportedSystemError(f"system {label!r} has rank {system.rank}, not {rank}")
    return system


def build_bc_system_with_table(label: str, table: dict) -> RootSystem:
    key = _ALIASES.get(label.upper(), label.upper())
    if not key.startswith("BC"):
        raise UnsupportedSystemError("offset tables apply to echelonnage systems only")
    return _bc_system(key, table)


def enumerate_virtual_roots(
    system: RootSystem,
    refinement: int,
    center: Vec,
    radius: Fraction,
) -> list[VirtualAffineRoot]:
    """Virtual affine roots whose zero hyperplane meets the closed box
    |x_i - center_i| <= radius, plus constant functionals of comparable size.

    Duplicate-free, canonically ordered by (gradient, constant).
    """
    if refinement < 1:
        raise ValueError("refinement must be >= 1")
    out = []
    bound = Fraction(0)
    for g in system.roots:
        spread = sum(abs(x) for x in g) * radius
        mid = dot(g, center)
        bound = max(bound, abs(mid) + spread)
        # psi = g + c vanishes inside the box iff -mid-spread <= c <= -mid+spread
        for c in system.virtual_constants_in(g, -mid - spread, -mid + spread, refinement):
            out.append(VirtualAffineRoot(g, c))
    zero = tuple(Fraction(0) for _ in range(system.rank))
    c = Fraction(-(int(bound * refinement) + 1), refinement)
    while c <= bound + 1:
        out.append(VirtualAffineRoot(zero, c))
        c += Fraction(1, refinement)
    return sorted(set(out), key=lambda p: p.sort_key())
