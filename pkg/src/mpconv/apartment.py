"""Refined simplicial structure of one apartment inside a bounded window.

Chambers of the refined hyperplane arrangement are simplices obtained from a
base alcove by mirror reflections, so the whole facet complex is enumerated
by a breadth-first walk across walls.  Facets are identified by their sign
vector over the window's hyperplane list; all coordinates are exact
rationals.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Optional, Sequence

from .linalg import (
    Mat,
    Vec,
    affine_reflection,
    centroid,
    dot,
    mat,
    mat_vec,
    rank as mat_rank,
    vadd,
    vec,
    vscale,
    vsub,
    vzero,
)
from .root_data import RootSystem, VirtualAffineRoot, build_root_system


class WindowOverflowError(RuntimeError):
    """An operation needed facets beyond the window boundary."""


@dataclass(frozen=True, order=True)
class Facet:
    """A face of the refined arrangement, keyed by its sign vector."""

    key: tuple
    dim: int
    vertices: tuple
    interior_point: Vec

    def contains(self, other: "Facet") -> bool:
        return set(other.vertices) <= set(self.vertices)

    def to_json(self) -> dict:
        return {
            "key": [int(s) for s in self.key],
            "dim": self.dim,
            "vertices": [[str(c) for c in v] for v in self.vertices],
            "interior_point": [str(c) for c in self.interior_point],
        }


@dataclass(frozen=True)
class ClosureReport:
    facets: tuple
    d_e: Facet
    d_f: Facet
    dim: int
    aligned: bool
    e_subaligned_to_f: bool


def base_alcove_vertices(system: RootSystem, refinement: int) -> tuple[Vec, ...]:
    """Vertices of the fundamental refined chamber with the origin as a vertex."""
    n = Fraction(refinement)
    if system.label.startswith("BC"):
        quarter = Fraction(1, 4) / n
        if system.rank == 1:
            return (vec([0]), vec([quarter]))
        return (vec([0, 0]), vec([quarter, 0]), vec([quarter, quarter]))
    theta = system.highest_root
    verts = [vzero(system.rank)]
    for i, marks in enumerate(theta):
        verts.append(vscale(Fraction(1) / (marks * n), system.fundamental_coweights[i]))
    return tuple(verts)


class Window:
    """Bounded box |x_i - center_i| <= radius with its refined facet tables."""

    def __init__(
        self,
        system: RootSystem | str,
        refinement: int = 1,
        radius: Fraction = Fraction(2),
        center: Optional[Vec] = None,
    ):
        self.system = build_root_system(system) if isinstance(system, str) else system
        self.refinement = int(refinement)
        if self.refinement < 1:
            raise ValueError("refinement must be a positive integer")
        self.radius = Fraction(radius)
        self.center = center if center is not None else vzero(self.system.rank)
        self.hyperplanes = self._relevant_hyperplanes()
        self._hyperplane_index = {h: i for i, h in enumerate(self.hyperplanes)}
        self._vertex_zero_sets: dict[Vec, frozenset] = {}
        self._facets: dict[tuple, Facet] = {}
        self._chamber_keys: list[tuple] = []
        self._adjacency: dict[tuple, dict[tuple, Optional[tuple]]] = {}
        self._chambers_of_facet: dict[tuple, set] = {}
        self._enumerate()

    # -- construction ----------------------------------------------------

    def _relevant_hyperplanes(self) -> tuple[VirtualAffineRoot, ...]:
        out = []
        zero = vzero(self.system.rank)
        for g in self.system.positive_roots:
            spread = sum(abs(x) for x in g) * self.radius
            mid = dot(g, self.center)
            for c in self.system.virtual_constants_in(
                g, -mid - spread, -mid + spread, self.refinement
            ):
                psi = VirtualAffineRoot(g, c)
                # skip hyperplanes that duplicate a previous gradient's zero set
                out.append(psi)
        # for non-reduced systems 2e+c and e+c/... never share zero sets, but
        # dedupe by zero locus defensively: psi and psi' define one wall when
        # proportional.
        seen = {}
        for psi in out:
            g = psi.gradient
            scale = next(x for x in g if x != 0)
            norm = (tuple(x / scale for x in g), psi.constant / scale)
            if norm not in seen or self._prefer(psi, seen[norm]):
                seen[norm] = psi
        return tuple(sorted(seen.values(), key=lambda p: p.sort_key()))

    def _prefer(self, a: VirtualAffineRoot, b: VirtualAffineRoot) -> bool:
        # prefer the non-divisible gradient as the wall label
        da = self.system.is_divisible_virtual(a, self.refinement)
        db = self.system.is_divisible_virtual(b, self.refinement)
        if da != db:
            return not da
        return a.sort_key() < b.sort_key()

    def in_box(self, x: Vec) -> bool:
        return all(abs(a - c) <= self.radius for a, c in zip(x, self.center))

    def _zero_set(self, v: Vec) -> frozenset:
        cached = self._vertex_zero_sets.get(v)
        if cached is None:
            cached = frozenset(i for i, h in enumerate(self.hyperplanes) if h(v) == 0)
            self._vertex_zero_sets[v] = cached
        return cached

    def _signs_at(self, x: Vec) -> tuple:
        return tuple(
            0 if val == 0 else (1 if val > 0 else -1)
            for val in (h(x) for h in self.hyperplanes)
        )

    def _register_facet(self, vertices: tuple, chamber_key: tuple, base_key: tuple) -> tuple:
        zeros = None
        for v in vertices:
            zs = self._zero_set(v)
            zeros = zs if zeros is None else (zeros & zs)
        key = tuple(0 if i in zeros else s for i, s in enumerate(base_key))
        if key not in self._facets:
            self._facets[key] = Facet(
                key=key,
                dim=len(vertices) - 1,
                vertices=tuple(sorted(vertices)),
                interior_point=centroid(vertices),
            )
        self._chambers_of_facet.setdefault(key, set()).add(chamber_key)
        return key

    def _enumerate(self) -> None:
        base = base_alcove_vertices(self.system, self.refinement)
        if not all(self.in_box(v) for v in base):
            raise WindowOverflowError("window too small to hold the base alcove")
        rank = self.system.rank
        start_key = self._signs_at(centroid(base))
        frontier = [(tuple(sorted(base)), start_key)]
        seen = {tuple(sorted(base))}
        while frontier:
            nxt = []
            for verts, key in frontier:
                self._chamber_keys.append(key)
                adj: dict[tuple, Optional[tuple]] = {}
                self._register_facet(verts, key, key)
                for sub in _proper_subsets(verts):
                    self._register_facet(sub, key, key)
                for i in range(rank + 1):
                    wall = tuple(v for j, v in enumerate(verts) if j != i)
                    wall_key = self._register_facet(wall, key, key)
                    hyp = self._wall_hyperplane(wall_key)
                    mirrored = self._reflect_chamber(verts, i, hyp)
                    if mirrored is None:
                        adj[wall_key] = None
                        continue
                    nverts = tuple(sorted(mirrored))
                    hyp_index = self._hyperplane_index[hyp]
                    nkey = tuple(
                        -s if j == hyp_index else s for j, s in enumerate(key)
                    )
                    # flip every hyperplane through the wall? only the wall's
                    # own zero hyperplane separates the two mirror chambers.
                    adj[wall_key] = nkey
                    if nverts not in seen:
                        seen.add(nverts)
                        nxt.append((nverts, nkey))
                self._adjacency[key] = adj
            frontier = nxt
        self._chamber_keys.sort()

    def _wall_hyperplane(self, wall_key: tuple) -> VirtualAffineRoot:
        wall = self._facets[wall_key]
        zeros = [i for i, s in enumerate(wall_key) if s == 0]
        for i in zeros:
            h = self.hyperplanes[i]
            if all(h(v) == 0 for v in wall.vertices):
                return h
        raise RuntimeError("wall without a supporting hyperplane")

    @lru_cache(maxsize=None)
    def _reflection_map(self, hyp: VirtualAffineRoot):
        return affine_reflection(hyp.gradient, hyp.constant, self.system.gram_inv)

    def _reflect_chamber(self, verts: tuple, drop: int, hyp: VirtualAffineRoot):
        matrix, shift = self._reflection_map(hyp)
        out = []
        for j, v in enumerate(verts):
            img = v if j != drop else vadd(mat_vec(matrix, v), shift)
            if not self.in_box(img):
                return None
            out.append(img)
        return out

    # -- queries -----------------------------------------------------------

    @property
    def chambers(self) -> list[Facet]:
        return [self._facets[k] for k in self._chamber_keys]

    def facet(self, key: tuple) -> Facet:
        return self._facets[key]

    def enumerate_facets(self, dim: Optional[int] = None) -> list[Facet]:
        out = [
            f
            for f in self._facets.values()
            if dim is None or f.dim == dim
        ]
        return sorted(out, key=lambda f: f.key)

    def facet_of_point(self, x: Vec) -> Facet:
        if not self.in_box(x):
            raise WindowOverflowError("point outside window")
        key = self._signs_at(x)
        f = self._facets.get(key)
        if f is None:
            raise WindowOverflowError(
                "facet of point not enumerated; enlarge the window radius"
            )
        return f

    def faces_of(self, facet: Facet) -> list[Facet]:
        out = []
        vset = set(facet.vertices)
        for sub in _nonempty_subsets(facet.vertices):
            zeros = None
            for v in sub:
                zs = self._zero_set(v)
                zeros = zs if zeros is None else (zeros & zs)
            key = tuple(0 if i in zeros else s for i, s in enumerate(facet.key))
            got = self._facets.get(key)
            if got is not None:
                out.append(got)
        return sorted(set(out), key=lambda f: f.key)

    def vsph(self, facet: Facet, check_margin: bool = True) -> list[Facet]:
        """All facets strictly containing the given one."""
        if check_margin:
            self.require_complete_star(facet)
        vset = set(facet.vertices)
        out = set()
        for ch in self.chambers_containing(facet):
            for g in self.faces_of(ch):
                if vset < set(g.vertices):
                    out.add(g)
        return sorted(out, key=lambda f: f.key)

    def chambers_containing(self, facet: Facet) -> list[Facet]:
        keys = self._chambers_of_facet.get(facet.key, set())
        out = [self._facets[k] for k in keys if self._facets[k].contains(facet)]
        return sorted(out, key=lambda f: f.key)

    def require_complete_star(self, facet: Facet) -> None:
        """Fail loudly when the star of a facet is clipped by the window."""
        for ch in self.chambers_containing(facet):
            adj = self._adjacency[ch.key]
            for wall_key, neighbor in adj.items():
                wall = self._facets[wall_key]
                if wall.contains(facet) and neighbor is None:
                    raise WindowOverflowError(
                        "star overflows the window; enlarge the radius"
                    )

    def adjacent_chamber(self, chamber: Facet, wall: Facet) -> Optional[Facet]:
        nkey = self._adjacency[chamber.key].get(wall.key)
        return None if nkey is None else self._facets[nkey]

    def chamber_walls(self, chamber: Facet) -> list[Facet]:
        return sorted(
            (self._facets[k] for k in self._adjacency[chamber.key]),
            key=lambda f: f.key,
        )

    def wall_root(self, wall: Facet) -> VirtualAffineRoot:
        """A virtual affine root vanishing on a codimension-one facet,
        preferring non-divisible gradients."""
        return self._wall_hyperplane(wall.key)

    # -- geometry ----------------------------------------------------------

    def convex_closure(self, e: Facet, f: Facet) -> ClosureReport:
        constraints: list[tuple[int, int]] = []
        for i, (se, sf) in enumerate(zip(e.key, f.key)):
            if se == 0 and sf == 0:
                constraints.append((i, 0))
            elif se == 0 or sf == 0 or se == sf:
                constraints.append((i, se if se != 0 else sf))
        members = []
        for g in self._facets.values():
            ok = True
            for i, s in constraints:
                gs = g.key[i]
                if s == 0:
                    if gs != 0:
                        ok = False
                        break
                elif gs != 0 and gs != s:
                    ok = False
                    break
            if ok:
                members.append(g)
        for g in members:
            for v in g.vertices:
                if any(abs(a - c) == self.radius for a, c in zip(v, self.center)):
                    raise WindowOverflowError(
                        "convex closure touches the window boundary"
                    )
        dim_c = max(g.dim for g in members)
        tops_e = [g for g in members if g.dim == dim_c and g.contains(e)]
        tops_f = [g for g in members if g.dim == dim_c and g.contains(f)]
        if len(tops_e) != 1 or len(tops_f) != 1:
            raise RuntimeError("top facet of convex closure not unique")
        aligned = dim_c == e.dim == f.dim
        sub = e.dim <= f.dim and dim_c == f.dim
        return ClosureReport(
            facets=tuple(sorted(members, key=lambda g: g.key)),
            d_e=tops_e[0],
            d_f=tops_f[0],
            dim=dim_c,
            aligned=aligned,
            e_subaligned_to_f=sub,
        )

    def opposite_pairs(self, e: Facet) -> list[tuple[Facet, Facet]]:
        star = self.vsph(e)
        matrix, shift = self._affine_span_reflection(e)
        pairs = []
        seen = set()
        for f in star:
            if f.key in seen:
                continue
            image = tuple(sorted(vadd(mat_vec(matrix, v), shift) for v in f.vertices))
            partner = next((g for g in star if g.vertices == image), None)
            if partner is None or partner.key == f.key:
                continue
            if not self._same_affine_span(f, partner):
                continue
            seen.add(f.key)
            seen.add(partner.key)
            pairs.append(tuple(sorted((f, partner), key=lambda x: x.key)))
        return sorted(pairs, key=lambda p: (p[0].key, p[1].key))

    def _same_affine_span(self, f: Facet, g: Facet) -> bool:
        if f.dim != g.dim:
            return False
        base = f.vertices[0]
        rows = [list(vsub(v, base)) for v in f.vertices[1:]]
        rows_g = [list(vsub(v, base)) for v in g.vertices]
        return mat_rank(rows + rows_g) == f.dim

    def _affine_span_reflection(self, e: Facet):
        """Exact reflection across Aff(e), orthogonal for the invariant form."""
        gram = self.system.gram
        base = e.vertices[0]
        basis = [vsub(v, base) for v in e.vertices[1:]]
        n = self.system.rank
        if basis:
            gmat = mat([[dot(u, mat_vec(gram, w)) for w in basis] for u in basis])
            ginv = _inv(gmat)
        cols = []
        for j in range(n):
            unit = vec([1 if k == j else 0 for k in range(n)])
            proj = vzero(n)
            if basis:
                rhs = vec([dot(u, mat_vec(gram, unit)) for u in basis])
                coeffs = mat_vec(ginv, rhs)
                for cfs, u in zip(coeffs, basis):
                    proj = vadd(proj, vscale(cfs, u))
            cols.append(vsub(vscale(Fraction(2), proj), unit))
        matrix = tuple(zip(*cols))
        # R(x) = base + M(x - base)
        shift = vsub(base, mat_vec(matrix, base))
        return matrix, shift

    def coarse_facet(self, e: Facet) -> Facet:
        if self.refinement == 1:
            return self.facet_of_point(e.interior_point)
        coarse = coarse_window(self.system.label, self.radius, self.center)
        return coarse.facet_of_point(e.interior_point)

    def alcove_diameter(self) -> Fraction:
        verts = base_alcove_vertices(self.system, self.refinement)
        return max(
            max(abs(a - b) for a, b in zip(u, v))
            for u in verts
            for v in verts
        )


def _inv(m: Mat) -> Mat:
    from .linalg import mat_inv

    return mat_inv(m)


def _proper_subsets(verts: tuple) -> list[tuple]:
    out = []
    n = len(verts)
    for mask in range(1, (1 << n) - 1):
        out.append(tuple(verts[i] for i in range(n) if mask & (1 << i)))
    return out


def _nonempty_subsets(verts: tuple) -> list[tuple]:
    out = []
    n = len(verts)
    for mask in range(1, 1 << n):
        out.append(tuple(verts[i] for i in range(n) if mask & (1 << i)))
    return out


@lru_cache(maxsize=32)
def _coarse_cache(label: str, radius: Fraction, center: tuple) -> Window:
    return Window(label, 1, radius, vec(center))


def coarse_window(label: str, radius: Fraction, center: Vec) -> Window:
    return _coarse_cache(label, radius, tuple(center))
