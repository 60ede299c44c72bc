"""Symbolic idempotent calculus: rewrite rules and Euler-Poincare sums.

Elements are normalized idempotents (plain indicator, character-twisted,
or class sums); ``conv_pair`` applies the structural rewrite rules and
returns ``None`` when no rule fires, in which case callers fall back to the
matrix oracle.  Formal rational combinations support the truncated
Euler-Poincare sums and their shell packets.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .apartment import Facet, Window
from .characters import (
    AssociateClass,
    MPCharacter,
    _block_toward,
    chi_of_class,
    cuspidal_support,
    is_cuspidal,
    restrict_character,
)
from .chamber_geometry import ball_facets, heights_from, outward_analysis
from .linalg import Vec, dot
from .mp_model import SupportFunction, group_support, quotient_lines
from .root_data import VirtualAffineRoot


class MixedDepthError(ValueError):
    """Convolution rules require one common depth."""


@dataclass(frozen=True)
class Plain:
    """Normalized indicator of a filtration group (e.g. depth r+ at a facet).

    Equality is by the support function alone: distinct facets can carry the
    same group (an edge with no depth-r lines shares its r+ group with the
    ambient chamber), and such terms must merge in formal sums.
    """

    support: SupportFunction
    depth: Fraction
    strict: bool
    facet_key: Optional[tuple] = field(default=None, compare=False)

    def label(self) -> str:
        tag = "+" if self.strict else ""
        return f"plain[r={self.depth}{tag}]"


@dataclass(frozen=True)
class CharIdem:
    """Character idempotent e_{E,A} on the depth-r group of a facet."""

    char: MPCharacter

    @property
    def facet_key(self) -> tuple:
        return self.char.facet.key


@dataclass(frozen=True)
class ClassIdem:
    """Class idempotent: sum of e_{D,chi} over the class characters at D."""

    class_id: str
    facet_key: tuple
    depth: Fraction
    q: int
    chi: frozenset  # coefficient tuples of chi(D)


@dataclass(frozen=True)
class ProductElement:
    """Unevaluated convolution product (reduced only by the oracle)."""

    factors: tuple


class FormalSum:
    """Rational formal combination of idempotent elements."""

    def __init__(self, terms: Optional[dict] = None):
        self.terms = dict(terms or {})
        self._clean()

    def _clean(self):
        self.terms = {k: v for k, v in self.terms.items() if v != 0}

    @staticmethod
    def of(element, coeff: Fraction = Fraction(1)) -> "FormalSum":
        return FormalSum({element: Fraction(coeff)})

    @staticmethod
    def zero() -> "FormalSum":
        return FormalSum({})

    def __add__(self, other: "FormalSum") -> "FormalSum":
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, Fraction(0)) + v
        return FormalSum(out)

    def scale(self, c: Fraction) -> "FormalSum":
        return FormalSum({k: v * c for k, v in self.terms.items()})

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other) -> bool:
        return isinstance(other, FormalSum) and self.terms == other.terms

    def __repr__(self) -> str:
        return f"FormalSum({len(self.terms)} terms)"


class ConvContext:
    """Window-level caches shared by the rewrite rules."""

    def __init__(
        self,
        window: Window,
        r: Fraction,
        q: int,
        classes: Optional[Sequence[AssociateClass]] = None,
    ):
        self.window = window
        self.r = Fraction(r)
        self.q = q
        self.classes = {c.class_id: c for c in (classes or [])}
        self._supports: dict = {}
        self._closure_tops: dict = {}

    def plain(self, facet: Facet, strict: bool = True, depth: Optional[Fraction] = None) -> Plain:
        r = self.r if depth is None else Fraction(depth)
        key = (facet.key, r, strict)
        got = self._supports.get(key)
        if got is None:
            got = group_support(self.window, facet, r, strict)
            self._supports[key] = got
        return Plain(support=got, depth=r, strict=strict, facet_key=facet.key)

    def char_idem(self, char: MPCharacter) -> CharIdem:
        return CharIdem(char)

    def class_idem(self, cls: AssociateClass, facet: Facet) -> FormalSum:
        """e^C_D as a formal sum: zero when chi(D) is empty."""
        if facet.key not in cls.closure_keys:
            return FormalSum.zero()
        chi = frozenset(a.coeffs for a in chi_of_class(self.window, cls, facet))
        if not chi:
            return FormalSum.zero()
        return FormalSum.of(
            ClassIdem(
                class_id=cls.class_id,
                facet_key=facet.key,
                depth=self.r,
                q=self.q,
                chi=chi,
            )
        )

    def facet(self, key: tuple) -> Facet:
        return self.window.facet(key)

    def closure_top(self, e: Facet, f: Facet):
        key = (e.key, f.key)
        got = self._closure_tops.get(key)
        if got is None:
            rep = self.window.convex_closure(e, f)
            got = (rep.d_e, rep.d_f)
            self._closure_tops[key] = got
        return got


def expand_class_idem(ctx: ConvContext, el: ClassIdem) -> FormalSum:
    """Expansion of a class idempotent into character idempotents."""
    facet = ctx.facet(el.facet_key)
    quot = quotient_lines(ctx.window, facet, el.depth, el.q)
    out = FormalSum.zero()
    for coeffs in sorted(el.chi):
        out = out + FormalSum.of(CharIdem(MPCharacter(quot, coeffs)))
    return out


# -- rewrite rules -------------------------------------------------------------


def conv_pair(ctx: ConvContext, a, b) -> Optional[FormalSum]:
    """Reduce a convolution of two elements; None when no rule applies."""
    if isinstance(a, Plain) and isinstance(b, Plain):
        return _conv_plain_plain(ctx, a, b)
    if isinstance(a, Plain) and isinstance(b, CharIdem):
        return _conv_plain_char(ctx, a, b)
    if isinstance(a, CharIdem) and isinstance(b, Plain):
        return _conv_plain_char(ctx, b, a)
    if isinstance(a, CharIdem) and isinstance(b, CharIdem):
        return _conv_char_char(ctx, a, b)
    if isinstance(a, Plain) and isinstance(b, ClassIdem):
        return _conv_plain_class(ctx, a, b)
    if isinstance(a, ClassIdem) and isinstance(b, Plain):
        return _conv_plain_class(ctx, b, a)
    if isinstance(a, ClassIdem) and isinstance(b, ClassIdem):
        return _conv_class_class(ctx, a, b)
    if isinstance(a, CharIdem) and isinstance(b, ClassIdem):
        return _conv_char_class(ctx, a, b, char_left=True)
    if isinstance(a, ClassIdem) and isinstance(b, CharIdem):
        return _conv_char_class(ctx, b, a, char_left=False)
    return None


def _require_same_depth(a, b):
    da = getattr(a, "depth", None)
    db = getattr(b, "depth", None)
    if da is not None and db is not None and da != db:
        raise MixedDepthError(f"cannot mix depths {da} and {db}")


def _conv_plain_plain(ctx: ConvContext, a: Plain, b: Plain) -> Optional[FormalSum]:
    _require_same_depth(a, b)
    # e_H1 * e_H2 collapses onto the larger group when nested
    if a.support.contains(b.support):
        return FormalSum.of(a)
    if b.support.contains(a.support):
        return FormalSum.of(b)
    if a.facet_key is None or b.facet_key is None or not (a.strict and b.strict):
        return None
    e, f = ctx.facet(a.facet_key), ctx.facet(b.facet_key)
    d_e, d_f = ctx.closure_top(e, f)
    if d_e == d_f:
        return FormalSum.of(ctx.plain(d_e, strict=True))
    return None


def _conv_plain_char(ctx: ConvContext, p: Plain, c: CharIdem) -> Optional[FormalSum]:
    _require_same_depth(p, c.char.quotient)
    if p.depth != c.char.quotient.depth:
        raise MixedDepthError("plain and character depths differ")
    window = ctx.window
    e = c.char.facet
    if p.facet_key is None:
        return None
    j = ctx.facet(p.facet_key)
    if not p.strict:
        return None
    if e.contains(j):
        # G_{J,r+} inside G_{E,r+}: absorbed
        return FormalSum.of(c)
    d_j, d_e = ctx.closure_top(j, e)
    if d_j != d_e:
        return None
    m = d_e  # contains e
    toward = _block_toward(window, e, m, p.depth) if m.key != e.key else []
    if all(c.char.line_coeff(l) == 0 for l in toward):
        return FormalSum.of(c)
    return FormalSum.zero()


def _conv_char_char(ctx: ConvContext, a: CharIdem, b: CharIdem) -> Optional[FormalSum]:
    ca, cb = a.char, b.char
    if ca.quotient.depth != cb.quotient.depth:
        raise MixedDepthError("character depths differ")
    window = ctx.window
    e, f = ca.facet, cb.facet
    if e.key == f.key:
        return FormalSum.of(a) if ca == cb else FormalSum.zero()
    if f.contains(e):
        bb = restrict_character(window, ca, f)
        if bb == cb:
            toward = _block_toward(window, e, f, ca.quotient.depth)
            if all(ca.line_coeff(l) == 0 for l in toward):
                return FormalSum.of(a)
    if e.contains(f):
        aa = restrict_character(window, cb, e)
        if aa == ca:
            toward = _block_toward(window, f, e, cb.quotient.depth)
            if all(cb.line_coeff(l) == 0 for l in toward):
                return FormalSum.of(b)
    (se, be), _ = cuspidal_support(window, ca)
    (sf, bf), _ = cuspidal_support(window, cb)
    rep = window.convex_closure(se, sf)
    if not rep.aligned:
        return FormalSum.zero()
    if se.key != sf.key:
        shared = set(be.quotient.lines) & set(bf.quotient.lines)
        matched = all(be.line_coeff(l) == bf.line_coeff(l) for l in shared) and (
            be.coeffs[len(be.quotient.lines):] == bf.coeffs[len(bf.quotient.lines):]
        )
    else:
        matched = be == bf
    if not matched:
        return FormalSum.zero()
    if is_cuspidal(window, ca) and is_cuspidal(window, cb):
        return FormalSum.of(ProductElement(factors=(a, b)))
    return None


def _conv_plain_class(ctx: ConvContext, p: Plain, cl: ClassIdem) -> Optional[FormalSum]:
    if p.depth != cl.depth:
        raise MixedDepthError("plain and class depths differ")
    if p.facet_key is None or not p.strict:
        return None
    j = ctx.facet(p.facet_key)
    f = ctx.facet(cl.facet_key)
    d_j, d_f = ctx.closure_top(j, f)
    if d_j != d_f:
        return None
    cls = ctx.classes.get(cl.class_id)
    if cls is None:
        return None
    return ctx.class_idem(cls, d_f)


def _conv_class_class(ctx: ConvContext, a: ClassIdem, b: ClassIdem) -> Optional[FormalSum]:
    if a.depth != b.depth:
        raise MixedDepthError("class depths differ")
    fa, fb = ctx.facet(a.facet_key), ctx.facet(b.facet_key)
    if a.class_id != b.class_id:
        if fa.key == fb.key:
            return FormalSum.zero()  # chi sets of distinct classes are disjoint
        return None
    if fa.contains(fb) or fb.contains(fa):
        bigger = a if fa.contains(fb) else b
        return FormalSum.of(bigger)
    return None


def _conv_char_class(
    ctx: ConvContext, c: CharIdem, cl: ClassIdem, char_left: bool
) -> Optional[FormalSum]:
    if c.char.quotient.depth != cl.depth:
        raise MixedDepthError("character and class depths differ")
    if c.char.facet.key == cl.facet_key:
        if c.char.coeffs in cl.chi:
            return FormalSum.of(c)
        return FormalSum.zero()
    return None


def conv_sums(ctx: ConvContext, fs1: FormalSum, fs2: FormalSum) -> Optional[FormalSum]:
    """Bilinear extension; None if any pairwise product is irreducible."""
    out = FormalSum.zero()
    for e1, c1 in fs1.terms.items():
        for e2, c2 in fs2.terms.items():
            red = conv_pair(ctx, e1, e2)
            if red is None:
                return None
            out = out + red.scale(c1 * c2)
    return out


# -- Euler-Poincare machinery ---------------------------------------------------


def sign(dim: int) -> Fraction:
    return Fraction(-1) ** dim


def element_for(ctx: ConvContext, facet: Facet, kind: str, cls: Optional[AssociateClass]):
    if kind == "plain":
        return FormalSum.of(ctx.plain(facet, strict=True))
    if kind == "class":
        if cls is None:
            raise ValueError("class kind needs an associate class")
        return ctx.class_idem(cls, facet)
    raise ValueError(f"unknown kind {kind!r}")


def ep_vsph(
    ctx: ConvContext,
    c: Facet,
    k: Facet,
    kind: str = "plain",
    cls: Optional[AssociateClass] = None,
) -> FormalSum:
    """Signed sum over the facets of c containing k."""
    window = ctx.window
    if not c.contains(k):
        raise ValueError("k must be a facet of c")
    out = FormalSum.zero()
    for f in window.faces_of(c):
        if f.contains(k):
            out = out + element_for(ctx, f, kind, cls).scale(sign(f.dim))
    return out


def ep_vsph_vanish_check(
    ctx: ConvContext,
    c: Facet,
    k: Facet,
    j: Facet,
    kind: str = "plain",
    cls: Optional[AssociateClass] = None,
) -> bool:
    """Exact vanishing of the signed star sum convolved with the J-indicator."""
    if k.contains(j):
        raise ValueError("precondition violated: j must not be a facet of k")
    total = FormalSum.zero()
    plain_j = FormalSum.of(ctx.plain(j, strict=True))
    summed = ep_vsph(ctx, c, k, kind, cls)
    reduced = conv_sums(ctx, summed, plain_j)
    if reduced is None:
        raise RuntimeError("star sum failed to reduce symbolically")
    return reduced.is_zero()


@dataclass(frozen=True)
class EPSum:
    base_key: tuple
    radius: int
    kind: str
    class_id: Optional[str]
    terms: tuple  # ((coeff, element), ...)

    def as_formal(self) -> FormalSum:
        out = FormalSum.zero()
        for el, coeff in self.terms:
            out = out + FormalSum.of(el, coeff)
        return out


def truncated_ep(
    ctx: ConvContext,
    c0: Facet,
    m: int,
    kind: str = "plain",
    cls: Optional[AssociateClass] = None,
) -> EPSum:
    """Signed idempotent sum over all facets of Ball(c0, m)."""
    total = FormalSum.zero()
    for f in ball_facets(ctx.window, c0, m):
        total = total + element_for(ctx, f, kind, cls).scale(sign(f.dim))
    return EPSum(
        base_key=c0.key,
        radius=m,
        kind=kind,
        class_id=None if cls is None else cls.class_id,
        terms=tuple(sorted(total.terms.items(), key=lambda kv: repr(kv[0]))),
    )


def shell_packet(
    ctx: ConvContext,
    c0: Facet,
    d: Facet,
    kind: str = "plain",
    cls: Optional[AssociateClass] = None,
) -> FormalSum:
    """Signed sum over facets between the outward cap of d and d itself."""
    analysis = outward_analysis(ctx.window, c0, d)
    out = FormalSum.zero()
    for f in ctx.window.faces_of(d):
        if f.contains(analysis.cap_facet):
            out = out + element_for(ctx, f, kind, cls).scale(sign(f.dim))
    return out


def absorption_certificate(
    ctx: ConvContext, c0: Facet, d: Facet, s: Fraction
) -> Optional[Facet]:
    """Search for an outward face F0 of d certifying shell-packet vanishing.

    With E the outward cap and F the intersection of the other outward
    faces, every virtual root at level r on E and above r on F must lie at
    level >= s on the base chamber; then the depth-s base idempotent absorbs
    the E-to-F change and the star sum vanishes.  Returns the witness face.
    """
    window = ctx.window
    system = window.system
    r = ctx.r
    analysis = outward_analysis(window, c0, d)
    children = list(analysis.children)
    if not children:
        return None
    for f0 in children:
        rest = [f for f in children if f.key != f0.key]
        if rest:
            verts = set(rest[0].vertices)
            for f in rest[1:]:
                verts &= set(f.vertices)
            f_mid = next(
                g for g in window.faces_of(d) if set(g.vertices) == verts
            )
        else:
            f_mid = d
        cap = analysis.cap_facet
        if set(f_mid.vertices) == set(cap.vertices):
            continue
        ok = True
        for g in system.roots:
            vals_cap = [dot(g, v) for v in cap.vertices]
            if min(vals_cap) != max(vals_cap):
                continue
            c = r - vals_cap[0]
            if not system.is_virtual_constant(g, c, window.refinement):
                continue
            psi = VirtualAffineRoot(g, c)
            vals_f = [psi(v) for v in f_mid.vertices]
            if not (min(vals_f) >= r and max(vals_f) > r):
                continue
            # psi must be absorbed: psi >= s everywhere on the base chamber
            if min(psi(v) for v in c0.vertices) < s:
                ok = False
                break
        if ok:
            return f0
    return None


def certified_shell_bound(window: Window, c0: Facet, s: Fraction, r: Fraction) -> int:
    """A height beyond which shell packets provably vanish.

    Conservative exact bound: with eps the base-chamber spread, any chamber
    of height L in a sector has a simple-root displacement above
    (L/#pos - 1)/(n h) - eps, so heights at least the returned value force a
    displacement exceeding (s - r) + h*eps plus one alcove of slack on each
    side.
    """
    system = window.system
    eps = Fraction(0)
    for g in system.roots:
        vals = [dot(g, v) for v in c0.vertices]
        eps = max(eps, max(vals) - min(vals))
    h = system.highest_root_height
    a = (Fraction(s) - Fraction(r)) + h * eps
    per_unit = 0
    for g in system.positive_roots:
        per_unit = max(per_unit, system.count_true_constants(g, Fraction(0), Fraction(1)))
    n_density = per_unit * window.refinement
    npos = len(system.positive_roots)
    slack = a + 2
    bound = npos * (n_density * h * max(slack, eps) + 1) + 1
    num = Fraction(bound)
    return int(num.numerator // num.denominator) + 1
