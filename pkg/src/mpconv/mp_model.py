"""Filtration-group support functions and graded quotient data.

A depth-r group attached to a facet is recorded as the minimal true affine
constant per gradient (after the ceiling collapse of virtual roots) plus an
integer torus threshold.  Quotient lines at depth r are the true affine
roots with constant value r on the facet; the torus block only appears at
integer depths.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .apartment import Facet, Window
from .linalg import Vec, dot, vadd, vscale
from .root_data import RootSystem, UnsupportedSystemError, VirtualAffineRoot


@dataclass(frozen=True)
class SupportFunction:
    """Thresholds (true affine constants) generating one open compact group."""

    system_label: str
    thresholds: tuple  # sorted tuple of (gradient, constant)
    torus: Fraction  # integer threshold for the gradient-zero block

    def threshold_map(self) -> dict:
        return dict(self.thresholds)

    def contains(self, other: "SupportFunction") -> bool:
        """Group containment: pointwise lower thresholds contain higher ones."""
        mine = self.threshold_map()
        theirs = other.threshold_map()
        if set(mine) != set(theirs):
            return False
        return self.torus <= other.torus and all(
            mine[g] <= theirs[g] for g in mine
        )

    def intersect(self, other: "SupportFunction") -> "SupportFunction":
        mine = self.threshold_map()
        theirs = other.threshold_map()
        merged = tuple(
            sorted((g, max(mine[g], theirs[g])) for g in mine)
        )
        return SupportFunction(self.system_label, merged, max(self.torus, other.torus))

    def merge(self, other: "SupportFunction") -> "SupportFunction":
        """Support of the group generated by both (pointwise minimum)."""
        mine = self.threshold_map()
        theirs = other.threshold_map()
        merged = tuple(
            sorted((g, min(mine[g], theirs[g])) for g in mine)
        )
        return SupportFunction(self.system_label, merged, min(self.torus, other.torus))

    def log_index(self, other: "SupportFunction", system: RootSystem) -> int:
        """log_q of the index [self : other] for other contained in self."""
        if not self.contains(other):
            raise ValueError("log_index needs a contained subgroup")
        mine = self.threshold_map()
        theirs = other.threshold_map()
        steps = 0
        for g, c in mine.items():
            steps += system.count_true_constants(g, c, theirs[g])
        steps += system.rank * int(other.torus - self.torus)
        return steps


@dataclass(frozen=True)
class MPQuotient:
    facet: Facet
    depth: Fraction
    lines: tuple  # tuple of VirtualAffineRoot with true constants
    torus_rank: int
    q: int

    @property
    def dim(self) -> int:
        return len(self.lines) + self.torus_rank

    def to_json(self) -> dict:
        return {
            "facet_key": [int(s) for s in self.facet.key],
            "r": str(self.depth),
            "lines": [
                {"gradient": [str(x) for x in l.gradient], "constant": str(l.constant)}
                for l in self.lines
            ],
            "torus_rank": self.torus_rank,
            "q": self.q,
        }


def _min_max_on(facet: Facet, gradient: Vec) -> tuple[Fraction, Fraction]:
    vals = [dot(gradient, v) for v in facet.vertices]
    return min(vals), max(vals)


def group_support(window: Window, facet: Facet, r: Fraction, strict: bool) -> SupportFunction:
    """Support of the depth-r (or r+) group attached to a facet."""
    system = window.system
    refinement = window.refinement
    r = Fraction(r)
    thresholds = []
    for g in system.roots:
        lo, hi = _min_max_on(facet, g)
        need = r - lo
        virt = system.true_ceiling(g, need * refinement, strict=strict and lo == hi)
        virt = virt / refinement
        thresholds.append((g, system.true_ceiling(g, virt)))
    if strict:
        torus = Fraction(_ceil(r)) if _ceil(r) > r else Fraction(_ceil(r) + 1)
    else:
        torus = Fraction(_ceil(r))
    support = SupportFunction(system.label, tuple(sorted(thresholds)), torus)
    _verify_constancy(window, facet, r, strict, support)
    return support


def _ceil(x: Fraction) -> int:
    return -((-x.numerator) // x.denominator)


def _verify_constancy(
    window: Window, facet: Facet, r: Fraction, strict: bool, support: SupportFunction
) -> None:
    """The point-level thresholds must agree at two interior samples."""
    pts = [facet.interior_point]
    if len(facet.vertices) > 1:
        weights = [Fraction(i + 1) for i in range(len(facet.vertices))]
        total = sum(weights)
        skew = tuple(Fraction(0) for _ in facet.interior_point)
        for w, v in zip(weights, facet.vertices):
            skew = vadd(skew, vscale(w / total, v))
        pts.append(skew)
    system = window.system
    for x in pts:
        for g, c in support.thresholds:
            # point threshold: smallest virtual psi with psi(x) >= r (> r strict)
            want = r - dot(g, x)
            virt = system.true_ceiling(g, want * window.refinement, strict=strict)
            lifted = system.true_ceiling(g, virt / window.refinement)
            if lifted != c:
                raise RuntimeError("support function not constant on facet interior")


def quotient_lines(window: Window, facet: Facet, r: Fraction, q: int) -> MPQuotient:
    """Lines of the depth-r graded quotient at a facet."""
    r = Fraction(r)
    if r <= 0:
        raise ValueError("depth must be positive; depth zero is out of scope")
    system = window.system
    lines = []
    for g in system.roots:
        lo, hi = _min_max_on(facet, g)
        if lo != hi:
            continue
        c = r - lo
        if system.is_true_constant(g, c):
            lines.append(VirtualAffineRoot(g, c))
    torus_rank = system.rank if r.denominator == 1 else 0
    return MPQuotient(
        facet=facet,
        depth=r,
        lines=tuple(sorted(lines, key=lambda p: p.sort_key())),
        torus_rank=torus_rank,
        q=q,
    )


@dataclass(frozen=True)
class IwahoriBlocks:
    """Partition of the depth-r lines of V_E induced by an opposite pair."""

    quotient: MPQuotient
    toward: tuple  # lines positive on int F  (V_{E,F})
    level: tuple  # lines constant r on F     (root part of V_F)
    away: tuple  # lines negative on int F   (V_{E,Fbar})

    def dims(self) -> tuple[int, int, int]:
        t = self.quotient.torus_rank
        return (len(self.toward), len(self.level) + t, len(self.away))


def iwahori_blocks(
    window: Window, e: Facet, f: Facet, fbar: Facet, r: Fraction, q: int = 2
) -> IwahoriBlocks:
    pairs = window.opposite_pairs(e)
    if tuple(sorted((f, fbar), key=lambda x: x.key)) not in pairs:
        raise ValueError("facets are not opposite with respect to e")
    quotient = quotient_lines(window, e, r, q=q)
    toward, level, away = [], [], []
    for line in quotient.lines:
        vals = [line(v) for v in f.vertices]
        if all(v == r for v in vals):
            level.append(line)
        elif min(vals) >= r:
            toward.append(line)
        elif max(vals) <= r:
            away.append(line)
        else:
            raise RuntimeError("line sign not constant on the opposite facet")
    blocks = IwahoriBlocks(
        quotient=quotient,
        toward=tuple(toward),
        level=tuple(level),
        away=tuple(away),
    )
    a, b, c = blocks.dims()
    if a + b + c != quotient.dim:
        raise RuntimeError("Iwahori blocks fail to partition the quotient")
    return blocks


def phi_facet(window: Window, facet: Facet, r: Fraction) -> tuple:
    """Gradients of virtual affine roots with constant value r on the facet."""
    system = window.system
    out = []
    for g in system.roots:
        lo, hi = _min_max_on(facet, g)
        if lo != hi:
            continue
        if system.is_virtual_constant(g, r - lo, window.refinement):
            out.append(g)
    step = Fraction(1, window.refinement)
    again = []
    for g in system.roots:
        lo, hi = _min_max_on(facet, g)
        if lo == hi and system.is_virtual_constant(g, r + step - lo, window.refinement):
            again.append(g)
    if out != again:
        raise RuntimeError("phi_E depended on r, which is impossible")
    return tuple(out)


def phi_blocks(
    window: Window, e: Facet, f: Facet, fbar: Facet, r: Fraction
) -> tuple[tuple, tuple, tuple]:
    """(Phi_F, Phi_{E,F}, Phi_{E,Fbar}) as gradient tuples."""
    system = window.system
    phi_e = phi_facet(window, e, r)
    phi_f = set(phi_facet(window, f, r))
    toward, away = [], []
    for g in phi_e:
        if g in phi_f:
            continue
        lo_e, _ = _min_max_on(e, g)
        c = r - lo_e
        psi = VirtualAffineRoot(g, c)
        vals = [psi(v) for v in f.vertices]
        if min(vals) >= r and max(vals) > r:
            toward.append(g)
        else:
            away.append(g)
    return tuple(sorted(phi_f)), tuple(sorted(toward)), tuple(sorted(away))


# ---------------------------------------------------------------------------
# Type-A reductive action on a graded quotient (entry-reading model)
# ---------------------------------------------------------------------------

_TYPE_A_SIZE = {"A1": 2, "A2": 3, "A3": 4}


def _root_to_entry(gradient: Vec) -> tuple[int, int]:
    """Decode a type-A root (simple-coefficient tuple) into a matrix entry."""
    coeffs = list(gradient)
    sign = 1
    if any(c < 0 for c in coeffs):
        sign = -1
        coeffs = [-c for c in coeffs]
    ones = [k for k, c in enumerate(coeffs) if c == 1]
    if not ones or any(c not in (0, 1) for c in coeffs):
        raise ValueError("not a type-A root")
    i, j = ones[0], ones[-1] + 1
    if ones != list(range(i, j)):
        raise ValueError("not a type-A root")
    return (i, j) if sign == 1 else (j, i)


def _entry_to_root(i: int, j: int, rank: int) -> Vec:
    coeffs = [Fraction(0)] * rank
    lo, hi = min(i, j), max(i, j)
    for k in range(lo, hi):
        coeffs[k] = Fraction(1)
    if i > j:
        coeffs = [-c for c in coeffs]
    return tuple(coeffs)


def _fraction_mod(x: Fraction, p: int) -> int:
    den = x.denominator % p
    if den == 0:
        raise ValueError("denominator not a unit modulo p")
    return (x.numerator % p) * pow(den, -1, p) % p


def _ppow(p: int, c: Fraction) -> Fraction:
    if Fraction(c).denominator != 1:
        raise ValueError("matrix model needs integer affine constants")
    return Fraction(p) ** int(c)


class QuotientModel:
    """Matrix model of one graded quotient for a type-A system.

    Vectors over F_p are encoded as exact SL_n matrices I + sum v_l p^{c_l}
    E_{(l)} (+ diagonal block at integer depth); conjugation by level-zero
    elements realizes the reductive action, with coordinates read back from
    matrix entries.
    """

    def __init__(self, window: Window, facet: Facet, r: Fraction, p: int):
        label = window.system.label
        if label not in _TYPE_A_SIZE:
            raise UnsupportedSystemError(
                "structure constants are implemented for type A systems only"
            )
        self.window = window
        self.facet = facet
        self.r = Fraction(r)
        self.p = p
        self.n = _TYPE_A_SIZE[label]
        self.quotient = quotient_lines(window, facet, r, p)
        self.entries = [
            (_root_to_entry(l.gradient), l.constant) for l in self.quotient.lines
        ]

    @property
    def dim(self) -> int:
        return self.quotient.dim

    def matrix_of(self, v: Sequence[int]):
        n, p, r = self.n, self.p, self.r
        m = [[Fraction(1 if i == j else 0) for j in range(n)] for i in range(n)]
        for ((i, j), c), coeff in zip(self.entries, v[: len(self.entries)]):
            m[i][j] += Fraction(coeff) * _ppow(p, c)
        if self.quotient.torus_rank:
            coords = list(v[len(self.entries) :])
            diag = [Fraction(0)] * n
            # coroot basis: coordinate k adds +1 at slot k, -1 at slot k+1
            for k, t in enumerate(coords):
                diag[k] += t
                diag[k + 1] -= t
            for i in range(n):
                m[i][i] += diag[i] * _ppow(p, Fraction(int(r)))
        return tuple(tuple(row) for row in m)

    def coords_of(self, m) -> tuple:
        p, r = self.p, self.r
        out = []
        for (i, j), c in self.entries:
            val = (m[i][j] - (1 if i == j else 0)) / _ppow(p, c)
            out.append(_fraction_mod(val, p))
        if self.quotient.torus_rank:
            diffs = []
            for i in range(self.n):
                diffs.append(_fraction_mod((m[i][i] - 1) / _ppow(p, Fraction(int(r))), p))
            acc = 0
            for k in range(self.n - 1):
                acc = (acc + diffs[k]) % p
                out.append(acc)
        return tuple(out)

    def action_matrix(self, g) -> tuple:
        """Matrix over F_p of Ad(g) acting on quotient coordinates."""
        from .linalg import mat_inv

        ginv = mat_inv(g)
        cols = []
        for k in range(self.dim):
            basis = [0] * self.dim
            basis[k] = 1
            m = self.matrix_of(basis)
            conj = _mat3(g, m, ginv)
            cols.append(self.coords_of(conj))
        return tuple(zip(*cols))


def _mat3(a, b, c):
    from .linalg import mat_mul

    return mat_mul(mat_mul(a, b), c)


def reductive_generators(window: Window, facet: Facet, r: Fraction, p: int):
    """Level-zero generators acting on the depth-r quotient of a facet.

    Returns (model, list of exact generator matrices): torus scalings, Weyl
    lifts for vanishing roots, and root-group elementaries.  Type A only.
    """
    model = QuotientModel(window, facet, r, p)
    system = window.system
    n = model.n
    gens = []
    # torus generators diag(.., u, u^{-1}, ..) for a primitive unit u
    u = _primitive_unit(p)
    for k in range(n - 1):
        diag = [Fraction(1)] * n
        diag[k] = Fraction(u)
        diag[k + 1] = Fraction(1, u)
        gens.append(tuple(tuple(diag[i] if i == j else Fraction(0) for j in range(n)) for i in range(n)))
    # level-zero affine root groups: x_psi(1) with psi = 0 on the facet
    zero_lines = []
    for g in system.roots:
        lo, hi = _min_max_on(facet, g)
        if lo == hi and system.is_true_constant(g, -lo):
            zero_lines.append(VirtualAffineRoot(g, -lo))
    for psi in zero_lines:
        i, j = _root_to_entry(psi.gradient)
        m = [[Fraction(1 if a == b else 0) for b in range(n)] for a in range(n)]
        m[i][j] += _ppow(p, psi.constant)
        gens.append(tuple(tuple(row) for row in m))
        # Weyl lift through the same wall
        w = [[Fraction(1 if a == b else 0) for b in range(n)] for a in range(n)]
        w[i][i] = w[j][j] = Fraction(0)
        w[i][j] = _ppow(p, psi.constant)
        w[j][i] = -_ppow(p, -psi.constant)
        gens.append(tuple(tuple(row) for row in w))
    return model, gens


def _primitive_unit(p: int) -> int:
    if p == 2:
        return 1
    for u in range(2, p):
        vals = set()
        x = 1
        for _ in range(p - 1):
            x = (x * u) % p
            vals.add(x)
        if len(vals) == p - 1:
            return u
    raise ValueError("no primitive unit found")
