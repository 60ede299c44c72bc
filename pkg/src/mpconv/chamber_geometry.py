"""Bruhat heights, balls, outward faces, sectors and simple-system search.

All chamber combinatorics are relative to a fixed base chamber C0 of a
window.  Heights count separating refined hyperplanes exactly; outward/
inward classification follows the side-of-wall rule, so it works even when
the mirror chamber is clipped by the window.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .apartment import Facet, Window, WindowOverflowError
from .linalg import Vec, dot, feasible, solve, transpose, mat, vsub, vec
from .root_data import VirtualAffineRoot


@dataclass(frozen=True)
class HeightProfile:
    base: Facet
    target: Facet
    per_pair: dict
    total: int


@dataclass(frozen=True)
class OutwardAnalysis:
    children: tuple
    parents: tuple
    cap_facet: Facet
    alpha_map: dict


def _require_chamber(window: Window, c: Facet) -> None:
    if c.dim != window.system.rank:
        raise ValueError("expected a chamber")


def _direction_class(window: Window, gradient: Vec) -> Vec:
    """Canonical primitive representative of +-multiples of a gradient."""
    nz = next(x for x in gradient if x != 0)
    g = tuple(x / abs(nz) for x in gradient)
    neg = tuple(-x for x in g)
    return max(g, neg)


def height(window: Window, c0: Facet, d: Facet) -> HeightProfile:
    _require_chamber(window, c0)
    _require_chamber(window, d)
    per: dict = {}
    total = 0
    x, y = c0.interior_point, d.interior_point
    for h in window.hyperplanes:
        vx, vy = h(x), h(y)
        if (vx > 0) != (vy > 0):
            key = _direction_class(window, h.gradient)
            per[key] = per.get(key, 0) + 1
            total += 1
    return HeightProfile(base=c0, target=d, per_pair=per, total=total)


def heights_from(window: Window, c0: Facet) -> dict:
    """Heights of every window chamber relative to c0, by wall-crossing BFS."""
    _require_chamber(window, c0)
    cache = getattr(window, "_height_cache", None)
    if cache is None:
        cache = {}
        window._height_cache = cache
    got = cache.get(c0.key)
    if got is not None:
        return got
    out = {c0.key: 0}
    frontier = [c0]
    while frontier:
        nxt = []
        for ch in frontier:
            h0 = out[ch.key]
            for wall in window.chamber_walls(ch):
                nb = window.adjacent_chamber(ch, wall)
                if nb is None or nb.key in out:
                    continue
                root = window.wall_root(wall)
                separated = (root(c0.interior_point) > 0) != (root(nb.interior_point) > 0)
                out[nb.key] = h0 + 1 if separated else h0 - 1
                nxt.append(nb)
        frontier = nxt
    cache[c0.key] = out
    return out


def ball(window: Window, c0: Facet, m: int) -> list[Facet]:
    """Chambers with height <= m; errors when the ball leaves the window."""
    hts = heights_from(window, c0)
    members = []
    for ch in window.chambers:
        h = hts[ch.key]
        if h > m:
            continue
        members.append(ch)
        for wall in window.chamber_walls(ch):
            if window.adjacent_chamber(ch, wall) is None:
                root = window.wall_root(wall)
                sep = (root(c0.interior_point) > 0) != (root(ch.interior_point) > 0)
                missing = h - 1 if sep else h + 1
                if missing <= m:
                    raise WindowOverflowError("ball of radius %d overflows window" % m)
    return sorted(members, key=lambda f: f.key)


def ball_facets(window: Window, c0: Facet, m: int) -> list[Facet]:
    """All facets of the closed chambers of Ball(c0, m)."""
    out = set()
    for ch in ball(window, c0, m):
        out.update(window.faces_of(ch))
    return sorted(out, key=lambda f: f.key)


def outward_analysis(window: Window, c0: Facet, d: Facet) -> OutwardAnalysis:
    _require_chamber(window, c0)
    _require_chamber(window, d)
    if d == c0:
        raise ValueError("outward analysis needs d != c0")
    children = []
    parents = []
    alpha = {}
    for wall in window.chamber_walls(d):
        root = window.wall_root(wall)
        toward_d = 1 if root(d.interior_point) > 0 else -1
        inward_dir = tuple(toward_d * g for g in root.gradient)
        separated = (root(c0.interior_point) > 0) != (root(d.interior_point) > 0)
        if separated:
            # crossing the wall moves toward c0: parent face, alpha points into d
            parents.append(wall)
            alpha[wall] = inward_dir
        else:
            children.append(wall)
            alpha[wall] = tuple(-g for g in inward_dir)
    if not children or not parents:
        raise RuntimeError("face partition of a non-base chamber must be nontrivial")
    cap_vertices = set(children[0].vertices)
    for f in children[1:]:
        cap_vertices &= set(f.vertices)
    cap = next(
        f for f in window.faces_of(d) if set(f.vertices) == cap_vertices
    )
    return OutwardAnalysis(
        children=tuple(sorted(children, key=lambda f: f.key)),
        parents=tuple(sorted(parents, key=lambda f: f.key)),
        cap_facet=cap,
        alpha_map=alpha,
    )


def outward_chamber(window: Window, c0: Facet, face: Facet) -> Facet:
    """The unique chamber of C(c0, face) containing the codimension-one face."""
    if face.dim != window.system.rank - 1:
        raise ValueError("expected a codimension-one facet")
    hts = heights_from(window, c0)
    candidates = [ch for ch in window.chambers_containing(face) if ch.dim == window.system.rank]
    if len(candidates) != 2:
        raise WindowOverflowError("face star clipped by the window")
    candidates.sort(key=lambda ch: hts[ch.key])
    return candidates[0]


def special_origin(window: Window, c0: Facet) -> Vec:
    """Least special vertex of the closure of c0 (short roots all vanish)."""
    system = window.system
    short = set(system.short_roots)
    for v in sorted(c0.vertices):
        vanishing = {
            g
            for g in system.roots
            if system.is_virtual_constant(g, -dot(g, v), window.refinement)
        }
        if short <= vanishing:
            return v
    raise RuntimeError("chamber closure contains no special vertex")


def sector_membership(window: Window, c0: Facet, delta: Iterable[Vec], d: Facet) -> bool:
    """Chain characterization of membership in the sector S(c0, delta)."""
    members = _sector_members(window, c0, frozenset(delta))
    return d.key in members


def _sector_members(window: Window, c0: Facet, delta: frozenset) -> set:
    cache = getattr(window, "_sector_cache", None)
    if cache is None:
        cache = {}
        window._sector_cache = cache
    got = cache.get((c0.key, delta))
    if got is not None:
        return got
    system = window.system
    hts = heights_from(window, c0)
    members = {c0.key}
    frontier = [c0]
    while frontier:
        nxt = []
        for ch in frontier:
            for wall in window.chamber_walls(ch):
                nb = window.adjacent_chamber(ch, wall)
                if nb is None or nb.key in members:
                    continue
                if hts[nb.key] != hts[ch.key] + 1:
                    continue
                root = window.wall_root(wall)
                crossing = 1 if root(nb.interior_point) > 0 else -1
                alpha = tuple(crossing * g for g in root.gradient)
                if system.positive_for(delta, alpha):
                    members.add(nb.key)
                    nxt.append(nb)
        frontier = nxt
    cache[(c0.key, delta)] = members
    return members


def _in_base_plus_cone(window: Window, c0: Facet, d: Facet, delta: Sequence[Vec]) -> bool:
    """Exact test of closure(d) inside closure(c0) + closed Weyl cone of delta."""
    base = list(c0.vertices)
    nvars = len(base)
    n = window.system.rank
    for v in d.vertices:
        eqs = [(vec([1] * nvars), Fraction(1))]
        ineqs = []
        for i in range(nvars):
            row = [Fraction(0)] * nvars
            row[i] = Fraction(-1)
            ineqs.append((vec(row), Fraction(0)))  # -lambda_i <= 0
        for a in delta:
            # a . (v - sum lambda_i w_i) >= 0   <=>   sum lambda_i a.w_i <= a.v
            row = vec([dot(a, w) for w in base])
            ineqs.append((row, dot(a, v)))
        if not feasible(eqs, ineqs, nvars):
            return False
    return True


def solve_delta(window: Window, c0: Facet, d: Facet):
    """All simple systems validating the base-to-chamber sector conditions,
    plus the constructive one from the longest-element recipe."""
    if d == c0:
        raise ValueError("solver needs d != c0")
    system = window.system
    analysis = outward_analysis(window, c0, d)
    alphas = list(analysis.alpha_map.values())
    outward_alphas = [analysis.alpha_map[f] for f in analysis.children]

    valid = []
    for delta in system.simple_systems():
        dl = sorted(delta)
        if not all(system.positive_for(dl, a) for a in alphas):
            continue
        if not _in_base_plus_cone(window, c0, d, dl):
            continue
        ok = True
        for a in dl:
            hit = False
            for af in outward_alphas:
                coeffs = solve(transpose(mat(dl)), af)
                if coeffs[dl.index(a)] != 0:
                    hit = True
                    break
            if not hit:
                ok = False
                break
        if ok:
            valid.append(frozenset(delta))

    x0 = special_origin(window, c0)
    pi = None
    rel = vsub(d.interior_point, x0)
    for delta in system.simple_systems():
        if all(dot(a, rel) > 0 for a in delta):
            pi = sorted(delta)
            break
    if pi is None:
        raise RuntimeError("chamber interior lies on a Weyl cone wall")
    theta = []
    for wall in window.chamber_walls(d):
        root = window.wall_root(wall)
        if root(x0) != 0:
            continue
        beta = next(
            (b for b in pi if _proportional(b, root.gradient)),
            None,
        )
        if beta is None:
            continue
        side_d = dot(beta, vsub(d.interior_point, x0)) > 0
        side_c0 = dot(beta, vsub(c0.interior_point, x0)) > 0
        if side_d == side_c0 and beta not in theta:
            theta.append(beta)
    w_theta = system.longest_element(theta)
    constructive = frozenset(system.weyl_on_functional(w_theta, b) for b in pi)
    return sorted(valid, key=lambda s: tuple(sorted(s))), constructive


def _proportional(a: Vec, b: Vec) -> bool:
    n = len(a)
    for i in range(n):
        if (a[i] == 0) != (b[i] == 0):
            return False
    ratios = {b[i] / a[i] for i in range(n) if a[i] != 0}
    return len(ratios) == 1


def vsph_subset_bijection(window: Window, c: Facet, k: Facet):
    """Bijection between subsets of the codim-1 faces through k and the
    facets of c containing k; the empty set maps to c itself."""
    _require_chamber(window, c)
    if not c.contains(k):
        raise ValueError("k must be a facet of c")
    faces = [
        f
        for f in window.chamber_walls(c)
        if f.contains(k)
    ]
    table = {}
    for mask in range(1 << len(faces)):
        sub = tuple(faces[i] for i in range(len(faces)) if mask & (1 << i))
        if not sub:
            target = c
        else:
            verts = set(sub[0].vertices)
            for f in sub[1:]:
                verts &= set(f.vertices)
            target = next(
                f for f in window.faces_of(c) if set(f.vertices) == verts
            )
        table[frozenset(f.key for f in sub)] = target
    targets = list(table.values())
    if len({t.key for t in targets}) != len(targets):
        raise RuntimeError("subset-to-facet map failed to be injective")
    vsph_c_k = [f for f in window.faces_of(c) if f.contains(k)]
    if {t.key for t in targets} != {f.key for f in vsph_c_k}:
        raise RuntimeError("subset-to-facet map failed to be surjective")
    return table


def check_cap_lemma(window: Window, c0: Facet, d: Facet, k: Facet) -> bool:
    """dim C(cap(d), k) > dim cap(d) for every facet k of the base chamber."""
    analysis = outward_analysis(window, c0, d)
    cap = analysis.cap_facet
    rep = window.convex_closure(cap, k)
    return rep.dim > cap.dim
