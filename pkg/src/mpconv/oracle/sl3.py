"""SL3 oracle checks, local to one apartment around the barycentric vertex."""

from __future__ import annotations

from fractions import Fraction
from typing import Optional

from ..apartment import Facet, Window
from ..characters import enumerate_characters
from ..convolution import ConvContext, conv_pair, CharIdem, Plain, FormalSum
from ..linalg import identity, vec
from ..mp_model import quotient_lines
from .algebra import GroupAlgebraElement, convolve
from .checks import CheckRow, elements_equal, refine_to, sign, sum_on_common_grid
from .realize import Realizer

THIRD = Fraction(1, 3)


class SL3Setup:
    """Window, realizer, and the star of the barycentric refined vertex."""

    def __init__(self, p: int = 2):
        self.p = p
        self.window = Window("A2", 3, Fraction(5, 2))
        self.r = THIRD
        self.realizer = Realizer(self.window, self.r, p)
        self.x0 = self.window.facet_of_point(vec([THIRD, THIRD]))
        self.star = [self.x0] + self.window.vsph(self.x0)

    def plain(self, facet: Facet, strict: bool = True):
        return self.realizer.plain(facet, strict=strict)


def check_boxed_supports(setup: SL3Setup) -> CheckRow:
    """The depth-1/3 quotient at x0 is supported exactly on the boxed entries."""
    rz = setup.realizer
    g_r = rz.group(setup.x0, strict=False)
    g_rp = rz.group(setup.x0, strict=True)
    jumps = {
        (i, j)
        for i in range(3)
        for j in range(3)
        if i != j and g_rp.thresholds[i][j] > g_r.thresholds[i][j]
    }
    ok = jumps == {(0, 1), (1, 2), (2, 0)}
    reps = g_r.transversal_mod(g_rp)
    ok = ok and len(reps) == setup.p ** 3
    keys = {g_rp.key(m) for m in reps}
    ok = ok and len(keys) == len(reps)
    # entries drop to the minimal valuation exactly on the boxed slots
    from .groups import val_p

    seen_min = set()
    for m in reps:
        for (i, j) in [(0, 1), (1, 2), (2, 0)]:
            delta = m[i][j]
            if delta != 0 and val_p(delta, setup.p) == int(g_r.thresholds[i][j]):
                seen_min.add((i, j))
    ok = ok and seen_min == {(0, 1), (1, 2), (2, 0)}
    return CheckRow(
        "sl3.boxed",
        {"p": setup.p, "N": 3, "r": str(setup.r)},
        "PASS" if ok else "FAIL",
        None if ok else {"jumps": sorted(jumps)},
    )


def check_star_pairs(setup: SL3Setup) -> CheckRow:
    """Convex-hull factorization for every facet pair of the x0 star."""
    bad = None
    rz = setup.realizer
    for e in setup.star:
        for f in setup.star:
            rep = setup.window.convex_closure(e, f)
            lhs = _conv(rz, rz.plain(e), rz.plain(f))
            step1 = _conv(rz, rz.plain(e), rz.plain(rep.d_e))
            step2 = _conv(rz, step1, rz.plain(rep.d_f))
            rhs = _conv(rz, step2, rz.plain(f))
            if not lhs.equals(rhs):
                bad = {"e": str(e.interior_point), "f": str(f.interior_point)}
                break
            if rep.d_e == rep.d_f:
                join = refine_to(rz.plain(rep.d_e), lhs.right)
                if not lhs.equals(join):
                    bad = {"e": str(e.interior_point), "join": True}
                    break
        if bad:
            break
    return CheckRow(
        "sl3.prop2.9",
        {"p": setup.p, "N": 3, "r": str(setup.r), "pairs": len(setup.star) ** 2},
        "FAIL" if bad else "PASS",
        bad,
    )


def _conv(rz: Realizer, f: GroupAlgebraElement, g: GroupAlgebraElement):
    refine = f.right.intersect_same_frame(g.left)
    return convolve(f, g, refine)


def check_symbolic_agreement(setup: SL3Setup) -> CheckRow:
    """Every symbolic reduction matches the oracle bit for bit on the star."""
    window = setup.window
    ctx = ConvContext(window, setup.r, setup.p)
    rz = setup.realizer
    bad = None
    quot = quotient_lines(window, setup.x0, setup.r, setup.p)
    chars = enumerate_characters(quot)[: min(8, setup.p ** 3)]
    elements = [("plain", f) for f in setup.star[:6]]
    elements += [("char", a) for a in chars[:4]]
    for kind1, x1 in elements:
        for kind2, x2 in elements:
            sym1 = (
                FormalSum.of(ctx.plain(x1)) if kind1 == "plain" else FormalSum.of(CharIdem(x1))
            )
            sym2 = (
                FormalSum.of(ctx.plain(x2)) if kind2 == "plain" else FormalSum.of(CharIdem(x2))
            )
            from ..convolution import conv_sums

            reduced = conv_sums(ctx, sym1, sym2)
            if reduced is None:
                continue
            left = _realize_formal(setup, FormalSum.of(list(sym1.terms)[0]))
            right = _realize_formal(setup, FormalSum.of(list(sym2.terms)[0]))
            got = _conv(rz, left, right)
            want = _realize_formal(setup, reduced)
            ok = got.is_zero() if want is None else elements_equal(want, got)
            if not ok:
                bad = {"k1": kind1, "k2": kind2}
                break
        if bad:
            break
    return CheckRow(
        "sl3.symbolic-match",
        {"p": setup.p, "N": 3, "r": str(setup.r)},
        "FAIL" if bad else "PASS",
        bad,
    )


def _realize_formal(setup: SL3Setup, fs: FormalSum):
    rz = setup.realizer
    terms = []
    for el, coeff in fs.terms.items():
        if isinstance(el, Plain):
            facet = setup.window.facet(el.facet_key)
            realized = rz.plain(facet, strict=el.strict)
        elif isinstance(el, CharIdem):
            realized = rz.char_element(el.char.facet, el.char.coeffs)
        else:
            raise ValueError("cannot realize this element kind")
        terms.append((coeff, realized))
    if not terms:
        return None
    return sum_on_common_grid(terms)


def check_vsph_vanishing_oracle(setup: SL3Setup) -> CheckRow:
    """Oracle spot checks of the signed star-sum vanishing at x0's chambers."""
    window = setup.window
    rz = setup.realizer
    bad = None
    chambers = [f for f in setup.star if f.dim == 2][:2]
    for c in chambers:
        faces = window.faces_of(c)
        verts = [f for f in faces if f.dim == 0]
        for k in verts[:2]:
            edges = [f for f in faces if f.dim == 1 and not f.contains(k)]
            if not edges:
                continue
            j = edges[0]
            plain_j = rz.plain(j)
            terms = []
            for f in faces:
                if f.contains(k):
                    el = _conv(rz, rz.plain(f), plain_j)
                    terms.append((sign(f.dim), refine_to(el, plain_j.right)))
            total = sum_on_common_grid(terms)
            if total is not None and not total.is_zero():
                bad = {"c": str(c.interior_point), "k": str(k.interior_point)}
                break
        if bad:
            break
    return CheckRow(
        "sl3.prop4.2",
        {"p": setup.p, "N": 3, "r": str(setup.r)},
        "FAIL" if bad else "PASS",
        bad,
    )
