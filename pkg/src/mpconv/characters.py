"""Characters of graded quotients: inflation, cuspidality, associate classes.

Characters are F_q coefficient vectors on the quotient lines (plus a torus
block at integer depth).  The group motions entering the associate-class
relation are realized by exact matrix lifts in the type-A model, so the
transported coefficients carry the correct structure-constant signs.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .apartment import Facet, Window, WindowOverflowError
from .linalg import Mat, Vec, dot, identity, mat_inv, mat_vec, vadd, vsub, vzero
from .mp_model import (
    MPQuotient,
    QuotientModel,
    _TYPE_A_SIZE,
    quotient_lines,
    reductive_generators,
)
from .root_data import UnsupportedSystemError, VirtualAffineRoot

ENUMERATION_BUDGET = 10**6


@dataclass(frozen=True)
class MPCharacter:
    quotient: MPQuotient
    coeffs: tuple  # line coefficients then torus coefficients, ints mod q

    def __post_init__(self):
        if len(self.coeffs) != self.quotient.dim:
            raise ValueError("coefficient vector has wrong length")

    @property
    def facet(self) -> Facet:
        return self.quotient.facet

    @property
    def q(self) -> int:
        return self.quotient.q

    def line_coeff(self, line: VirtualAffineRoot) -> int:
        return self.coeffs[self.quotient.lines.index(line)]

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)

    def negate(self) -> "MPCharacter":
        q = self.q
        return MPCharacter(self.quotient, tuple((-c) % q for c in self.coeffs))

    def sort_key(self):
        return (self.facet.key, self.coeffs)


def zero_character(quotient: MPQuotient) -> MPCharacter:
    return MPCharacter(quotient, tuple(0 for _ in range(quotient.dim)))


def enumerate_characters(quotient: MPQuotient) -> list[MPCharacter]:
    q, d = quotient.q, quotient.dim
    if q**d > ENUMERATION_BUDGET:
        raise ValueError("character space exceeds enumeration budget")
    out = []
    for idx in range(q**d):
        coeffs = []
        k = idx
        for _ in range(d):
            coeffs.append(k % q)
            k //= q
        out.append(MPCharacter(quotient, tuple(coeffs)))
    return out


# -- inflation / restriction -------------------------------------------------


def _block_toward(window: Window, e: Facet, f: Facet, r: Fraction) -> list:
    """Lines of V_e whose value exceeds r on the interior of f (f contains e)."""
    quot = quotient_lines(window, e, r, q=2)
    out = []
    for line in quot.lines:
        vals = [line(v) for v in f.vertices]
        if min(vals) >= r and max(vals) > r:
            out.append(line)
    return out


def restrict_character(window: Window, a: MPCharacter, f: Facet) -> MPCharacter:
    """Restriction of a character of V_E to V_F for F containing E."""
    e = a.facet
    if not f.contains(e):
        raise ValueError("restriction needs a facet containing the base")
    target = quotient_lines(window, f, a.quotient.depth, a.q)
    coeffs = []
    for line in target.lines:
        coeffs.append(a.line_coeff(line))
    coeffs.extend(a.coeffs[len(a.quotient.lines):])
    return MPCharacter(target, tuple(coeffs))


def inflate_character(window: Window, b: MPCharacter, e: Facet) -> MPCharacter:
    """Canonical inflation of a character of V_F to V_E (zero off V_F)."""
    f = b.facet
    if not f.contains(e):
        raise ValueError("inflation needs a subfacet of the source facet")
    target = quotient_lines(window, e, b.quotient.depth, b.q)
    coeffs = []
    for line in target.lines:
        coeffs.append(b.line_coeff(line) if line in b.quotient.lines else 0)
    coeffs.extend(b.coeffs[len(b.quotient.lines):])
    return MPCharacter(target, tuple(coeffs))


def is_inflation_of(window: Window, a: MPCharacter, f: Facet, b: MPCharacter) -> bool:
    """Does a arise from (f, b) by parabolic inflation?"""
    e = a.facet
    if not f.contains(e):
        return False
    if restrict_character(window, a, f) != b:
        return False
    toward = _block_toward(window, e, f, a.quotient.depth)
    return all(a.line_coeff(l) == 0 for l in toward)


# -- cuspidality --------------------------------------------------------------


def is_cuspidal(window: Window, a: MPCharacter) -> bool:
    """Nontrivial on the positive block of every properly containing facet."""
    e = a.facet
    r = a.quotient.depth
    for f in window.vsph(e):
        toward = _block_toward(window, e, f, r)
        if all(a.line_coeff(l) == 0 for l in toward):
            return False
    return True


def star_local(window: Window, e: Facet) -> bool:
    """Whether the building star of e is visible inside one apartment.

    True exactly when every facet containing e lies in the closure of the
    coarse (unrefined) facet around e; parahoric transitivity then implies
    no other apartment contributes new star members.
    """
    coarse = window.coarse_facet(e)
    cw = window if window.refinement == 1 else None
    if cw is None:
        from .apartment import coarse_window

        cw = coarse_window(window.system.label, window.radius, window.center)
    for f in window.vsph(e):
        for v in f.vertices:
            signs = cw._signs_at(v)
            for s, ref in zip(signs, coarse.key):
                if s != 0 and s != ref:
                    return False
    return True


def is_cuspidal_building(window: Window, a: MPCharacter) -> bool:
    """Cuspidality against the full building star.

    Either the star is apartment-local, or the reductive orbit of the
    character must consist of apartment-cuspidal characters (level-zero
    conjugation reaches the blocks of every apartment through the facet).
    """
    e = a.facet
    if not is_cuspidal(window, a):
        return False
    if star_local(window, e):
        return True
    model, gens = reductive_generators(window, e, a.quotient.depth, a.q)
    mats = [model.action_matrix(g) for g in gens]
    seen = {a.coeffs}
    frontier = [a.coeffs]
    q = a.q
    while frontier:
        nxt = []
        for coeffs in frontier:
            for m in mats:
                newc = tuple(
                    sum(coeffs[i] * m[i][j] for i in range(len(coeffs))) % q
                    for j in range(len(coeffs))
                )
                if newc not in seen:
                    if not is_cuspidal(window, MPCharacter(a.quotient, newc)):
                        return False
                    seen.add(newc)
                    nxt.append(newc)
        frontier = nxt
    return True


def criterion_check(window: Window, a: MPCharacter) -> bool:
    """Gradient-pairing cuspidality criterion over facet directions.

    For each star facet F the test direction is the invariant-metric
    projection of the centroid offset orthogonally to Aff(E); the character
    must be nonzero on some line whose gradient pairs positively with it.
    """
    e = a.facet
    system = window.system
    gram = system.gram
    base = e.vertices[0]
    basis = [vsub(v, base) for v in e.vertices[1:]]
    for f in window.vsph(e):
        u = vsub(f.interior_point, e.interior_point)
        if basis:
            from .linalg import mat, solve

            gmat = mat([[dot(x, mat_vec(gram, y)) for y in basis] for x in basis])
            rhs = tuple(dot(x, mat_vec(gram, u)) for x in basis)
            coeffs = solve(gmat, rhs)
            for c, x in zip(coeffs, basis):
                u = vsub(u, tuple(c * xi for xi in x))
        ok = False
        for line, coeff in zip(a.quotient.lines, a.coeffs):
            if coeff != 0 and dot(line.gradient, u) > 0:
                ok = True
                break
        if not ok:
            return False
    return True


def cuspidal_support(window: Window, a: MPCharacter):
    """Maximal facets the character is inflated from, with restrictions.

    Returns (canonical pair, all maximal pairs); the canonical choice is the
    lexicographically least facet key.
    """
    e = a.facet
    r = a.quotient.depth
    candidates = [(e, a)]
    for f in window.vsph(e):
        toward = _block_toward(window, e, f, r)
        if all(a.line_coeff(l) == 0 for l in toward):
            candidates.append((f, restrict_character(window, a, f)))
    top = max(f.dim for f, _ in candidates)
    maximal = sorted(
        ((f, b) for f, b in candidates if f.dim == top), key=lambda fb: fb[0].key
    )
    for f, b in maximal:
        if not is_cuspidal(window, b):
            raise RuntimeError("restriction to a maximal facet failed cuspidality")
    for i in range(len(maximal)):
        for j in range(i + 1, len(maximal)):
            f1, b1 = maximal[i]
            f2, b2 = maximal[j]
            rep = window.convex_closure(f1, f2)
            if not rep.aligned:
                raise RuntimeError("maximal inflation facets are not aligned")
    return maximal[0], maximal


def enumerate_cuspidal(window: Window, e: Facet, r: Fraction, q: int) -> list[MPCharacter]:
    quot = quotient_lines(window, e, r, q)
    out = [a for a in enumerate_characters(quot) if is_cuspidal(window, a)]
    return sorted(out, key=lambda a: a.sort_key())


# -- associate classes ---------------------------------------------------------


@dataclass(frozen=True)
class AssociateClass:
    class_id: str
    members: tuple  # MPCharacter tuple, canonically ordered
    support_keys: frozenset  # facet keys carrying class members
    closure_keys: frozenset  # subfacets of the support
    window_limited: bool

    def member_coeffs_at(self, facet: Facet) -> set:
        return {
            a.coeffs for a in self.members if a.facet.key == facet.key
        }


class _MotionLift:
    """Apartment motion together with its exact matrix lift."""

    def __init__(self, motion, lift: Mat):
        self.motion = motion
        self.lift = lift


def _type_a_lifts(window: Window) -> list[_MotionLift]:
    system = window.system
    label = system.label
    if label not in _TYPE_A_SIZE:
        raise UnsupportedSystemError(
            "associate classes need type-A structure constants"
        )
    n = _TYPE_A_SIZE[label]
    out = []
    for i in range(n - 1):
        refl = system.reflection_matrix(system.simple_roots[i])
        lift = [[Fraction(1 if a == b else 0) for b in range(n)] for a in range(n)]
        lift[i][i] = lift[i + 1][i + 1] = Fraction(0)
        lift[i][i + 1] = Fraction(1)
        lift[i + 1][i] = Fraction(-1)
        out.append(
            _MotionLift(
                system.motion(refl, vzero(system.rank)),
                tuple(tuple(row) for row in lift),
            )
        )
    p = getattr(window, "_prime_hint", 2)
    for i in range(n - 1):
        coroot = system.simple_coroots[i]
        for sign in (1, -1):
            diag = [Fraction(1)] * n
            diag[i] = Fraction(1, p) ** sign
            diag[i + 1] = Fraction(p) ** sign
            lift = tuple(
                tuple(diag[a] if a == b else Fraction(0) for b in range(n))
                for a in range(n)
            )
            trans = tuple(sign * c for c in coroot)
            out.append(_MotionLift(system.motion(identity(system.rank), trans), lift))
    return out


def transport_character(
    window: Window, a: MPCharacter, lift: _MotionLift, p: int
) -> Optional[MPCharacter]:
    """Image of (E, A) under a lifted motion, or None when it leaves the window."""
    e = a.facet
    m = lift.motion
    imgs = [m.apply_point(v) for v in e.vertices]
    if not all(window.in_box(v) for v in imgs):
        return None
    try:
        e2 = window.facet_of_point(m.apply_point(e.interior_point))
    except WindowOverflowError:
        return None
    if set(e2.vertices) != set(imgs):
        return None
    r = a.quotient.depth
    model_src = QuotientModel(window, e, r, p)
    model_dst = QuotientModel(window, e2, r, p)
    g = lift.lift
    ginv = mat_inv(g)
    coeffs_new = []
    from .linalg import mat_mul

    for k in range(model_dst.dim):
        basis = [0] * model_dst.dim
        basis[k] = 1
        mk = model_dst.matrix_of(basis)
        back = mat_mul(mat_mul(ginv, mk), g)
        coords = model_src.coords_of(back)
        val = sum(ci * co for ci, co in zip(a.coeffs, coords)) % a.q
        coeffs_new.append(val)
    return MPCharacter(model_dst.quotient, tuple(coeffs_new))


def _aligned_partners(window: Window, e: Facet) -> list[Facet]:
    """Facets sharing the affine span of e (hence aligned with it)."""
    zeros = frozenset(i for i, s in enumerate(e.key) if s == 0)
    out = []
    for f in window.enumerate_facets(dim=e.dim):
        if f.key == e.key:
            continue
        fzeros = frozenset(i for i, s in enumerate(f.key) if s == 0)
        if fzeros == zeros and window._same_affine_span(e, f):
            out.append(f)
    return out


def associate_classes(
    window: Window, r: Fraction, q: int, max_facets: Optional[int] = None
) -> list[AssociateClass]:
    """Partition of the window's cuspidal pairs into associate classes.

    The generated relation uses affine Weyl motions with exact lifts,
    same-span alignment transport, and the level-zero reductive orbits.
    """
    window._prime_hint = q
    lifts = _type_a_lifts(window)
    facets = []
    for f in window.enumerate_facets():
        try:
            window.require_complete_star(f)
        except WindowOverflowError:
            continue
        facets.append(f)
    if max_facets is not None:
        facets = facets[:max_facets]

    pairs: dict[tuple, MPCharacter] = {}
    for f in facets:
        local = star_local(window, f)
        for a in enumerate_cuspidal(window, f, r, q):
            if local or is_cuspidal_building(window, a):
                pairs[(f.key, a.coeffs)] = a

    parent: dict[tuple, tuple] = {k: k for k in pairs}
    limited: set[tuple] = set()

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(x, y):
        rx, ry = find(x), find(y)
        if rx != ry:
            parent[max(rx, ry)] = min(rx, ry)

    # reductive orbits per facet
    action_cache: dict[tuple, list] = {}
    for f in facets:
        model, gens = reductive_generators(window, f, r, q)
        mats = [model.action_matrix(g) for g in gens]
        action_cache[f.key] = mats
    for (fkey, coeffs), a in list(pairs.items()):
        for mat_g in action_cache[fkey]:
            newc = tuple(
                sum(coeffs[i] * mat_g[i][j] for i in range(len(coeffs))) % q
                for j in range(len(coeffs))
            )
            other = (fkey, newc)
            if other in pairs:
                union((fkey, coeffs), other)
            else:
                # the orbit left the cuspidal locus, which cannot happen
                raise RuntimeError("reductive action broke cuspidality")

    # alignment transport
    span_cache: dict[tuple, list] = {}
    for f in facets:
        span_cache[f.key] = _aligned_partners(window, f)
    for (fkey, coeffs), a in list(pairs.items()):
        for f2 in span_cache[fkey]:
            other = (f2.key, coeffs)
            if other in pairs:
                union((fkey, coeffs), other)
            else:
                limited.add(find((fkey, coeffs)))

    # affine Weyl motions with exact lifts
    for (fkey, coeffs), a in list(pairs.items()):
        for lift in lifts:
            image = transport_character(window, a, lift, q)
            if image is None:
                limited.add(find((fkey, coeffs)))
                continue
            other = (image.facet.key, image.coeffs)
            if other in pairs:
                union((fkey, coeffs), other)
            else:
                limited.add(find((fkey, coeffs)))

    groups: dict[tuple, list] = {}
    for k in pairs:
        groups.setdefault(find(k), []).append(k)
    out = []
    for root_key in sorted(groups):
        members = sorted((pairs[k] for k in groups[root_key]), key=lambda a: a.sort_key())
        support = frozenset(a.facet.key for a in members)
        closure = set()
        for a in members:
            for g in window.faces_of(a.facet):
                closure.add(g.key)
        is_limited = any(find(k) in limited for k in groups[root_key])
        class_id = "C" + "_".join(
            str(s) for s in _short_id(members[0])
        )
        out.append(
            AssociateClass(
                class_id=class_id,
                members=tuple(members),
                support_keys=support,
                closure_keys=frozenset(closure),
                window_limited=is_limited,
            )
        )
    return out


def _short_id(a: MPCharacter):
    return (a.facet.dim, sum(1 for c in a.coeffs if c), hash((a.facet.key, a.coeffs)) % 10**6)


def star_of_class(window: Window, cls: AssociateClass, d: Facet) -> list[Facet]:
    """Facets of the class support containing d."""
    if d.key not in cls.closure_keys:
        raise ValueError("facet lies outside the class closure")
    out = []
    for key in cls.support_keys:
        f = window.facet(key)
        if f.contains(d):
            out.append(f)
    return sorted(out, key=lambda f: f.key)


def inflation_set(
    window: Window, d: Facet, f: Facet, coeff_set, r: Fraction, q: int
) -> set:
    """Coefficient tuples on V_d parabolically inflated from (f, B), B in set."""
    quot = quotient_lines(window, d, r, q)
    fquot = quotient_lines(window, f, r, q)
    toward = set(_block_toward(window, d, f, r)) if f.key != d.key else set()
    free = [l for l in quot.lines if l not in fquot.lines and l not in toward]
    out = set()
    for coeffs in coeff_set:
        b = MPCharacter(fquot, tuple(coeffs))
        base = inflate_character(window, b, d)
        for mask in range(q ** len(free)):
            k = mask
            extra = list(base.coeffs)
            for l in free:
                extra[quot.lines.index(l)] = k % q
                k //= q
            out.add(tuple(extra))
    return out


def chi_of_class(window: Window, cls: AssociateClass, d: Facet) -> list[MPCharacter]:
    """Characters of V_d parabolically inflated from class pairs above d."""
    star = star_of_class(window, cls, d)
    r = cls.members[0].quotient.depth
    q = cls.members[0].q
    quot = quotient_lines(window, d, r, q)
    out = set()
    for f in star:
        wanted = cls.member_coeffs_at(f)
        for coeffs in inflation_set(window, d, f, wanted, r, q):
            out.add(MPCharacter(quot, coeffs))
    return sorted(out, key=lambda a: a.sort_key())


def partition_check(window: Window, classes: Sequence[AssociateClass], d: Facet) -> bool:
    """The chi sets of all classes partition the full character space of V_d."""
    r = classes[0].members[0].quotient.depth
    q = classes[0].members[0].q
    quot = quotient_lines(window, d, r, q)
    everything = {a.coeffs for a in enumerate_characters(quot)}
    seen: set = set()
    for cls in classes:
        if d.key not in cls.closure_keys:
            continue
        chi = {a.coeffs for a in chi_of_class(window, cls, d)}
        if chi & seen:
            return False
        seen |= chi
    return seen == everything
