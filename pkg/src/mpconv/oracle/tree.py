"""The refined SL2 tree: lattice vertices, subdivided chambers, frames.

Vertices are homothety classes of rank-two lattices over the p-local
integers, kept as canonical Hermite-form bases.  Every pair of facets is
placed on a common apartment through an exact frame matrix, so filtration
groups off the standard apartment are conjugated entry-pattern groups.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional

from ..linalg import Mat, identity, mat, mat_inv, mat_mul, vec
from .groups import val_p


def _residue_mod(x: Fraction, p: int, k: int) -> Fraction:
    """Canonical representative of a p-integral rational modulo p^k."""
    if k <= 0:
        return Fraction(0)
    mod = p**k
    den = x.denominator % mod
    num = x.numerator % mod
    inv = pow(den, -1, mod)
    return Fraction((num * inv) % mod)


def canonical_lattice(basis: Mat, p: int) -> tuple:
    """Canonical form of the homothety class of a column-span lattice.

    Returns (pivot_row, k, residue) describing the basis
    [(1, x), (0, p^k)] in pivot order; the class is scaled so the pivot
    column is primitive.
    """
    cols = [tuple(basis[i][j] for i in range(2)) for j in range(2)]
    vals = []
    for c in cols:
        vals.append(min(val_p(x, p) for x in c if x != 0))
    shift = min(vals)
    cols = [tuple(x / Fraction(p) ** shift for x in c) for c in cols]
    # choose pivot row: a unit entry after scaling
    flat_vals = {
        (i, j): (val_p(cols[j][i], p) if cols[j][i] != 0 else None)
        for i in range(2)
        for j in range(2)
    }
    pivot = None
    for (i, j), v in sorted(flat_vals.items()):
        if v == 0:
            pivot = (i, j)
            break
    if pivot is None:
        raise RuntimeError("no unit pivot found")
    pi, pj = pivot
    u = cols[pj]
    w = cols[1 - pj]
    u = tuple(x / u[pi] for x in u)
    w = tuple(wx - w[pi] * ux for wx, ux in zip(w, u))
    oi = 1 - pi
    if w[oi] == 0:
        raise RuntimeError("degenerate lattice basis")
    k = val_p(w[oi], p)
    if k < 0:
        # the complementary column is deeper than the pivot scale; rescale
        u, w = tuple(x / w[oi] for x in w), u
        raise RuntimeError("unexpected negative cotype")
    w = tuple(x / (w[oi] / Fraction(p) ** k) for x in w)
    res = _residue_mod(u[oi], p, k)
    return (pi, k, res)


def lattice_basis_from_canonical(form: tuple, p: int) -> Mat:
    pi, k, res = form
    oi = 1 - pi
    cols = [[Fraction(0)] * 2 for _ in range(2)]
    # column 0: pivot column (1 at pivot row, residue at other row)
    cols[0][pi] = Fraction(1)
    cols[0][oi] = Fraction(res)
    cols[1][pi] = Fraction(0)
    cols[1][oi] = Fraction(p) ** k
    return tuple((cols[0][i], cols[1][i]) for i in range(2))


@dataclass(frozen=True)
class TreeFacet:
    """A refined facet: chamber segment or point on an edge.

    kind "chamber": segment [pos, pos+1]/N on the oriented edge;
    kind "point": vertex (edge None) or interior subdivision point.
    """

    kind: str
    vertex: Optional[tuple] = None
    edge: Optional[tuple] = None  # (vertex_form_a, vertex_form_b), a < b
    pos: int = 0  # chamber index in [0, N) or point index in (0, N)

    @property
    def dim(self) -> int:
        return 1 if self.kind == "chamber" else 0

    def sort_key(self):
        return (self.kind, self.vertex or (), self.edge or (), self.pos)


class TreeComplex:
    def __init__(self, p: int, refinement: int, radius: int):
        self.p = p
        self.refinement = int(refinement)
        self.radius = radius
        self.vertices: set = set()
        self.edges: set = set()
        self._vertex_basis: dict = {}
        self._adj: dict = {}
        self._build()

    # -- construction ---------------------------------------------------

    def _build(self) -> None:
        p = self.p
        root = canonical_lattice(identity(2), p)
        self.vertices.add(root)
        self._vertex_basis[root] = lattice_basis_from_canonical(root, p)
        frontier = [root]
        # grow enough vertices to cover chambers within the chamber radius
        steps = self.radius // self.refinement + 2
        for _ in range(steps):
            nxt = []
            for v in frontier:
                for w in self.vertex_neighbors(v):
                    e = tuple(sorted((v, w)))
                    self.edges.add(e)
                    if w not in self.vertices:
                        self.vertices.add(w)
                        nxt.append(w)
            frontier = nxt
        for v, w in self.edges:
            self._adj.setdefault(v, set()).add(w)
            self._adj.setdefault(w, set()).add(v)

    def vertex_neighbors(self, form: tuple) -> list[tuple]:
        p = self.p
        basis = self._vertex_basis.get(form) or lattice_basis_from_canonical(form, p)
        self._vertex_basis.setdefault(form, basis)
        f1 = (basis[0][0], basis[1][0])
        f2 = (basis[0][1], basis[1][1])
        out = []
        for j in range(p):
            cols = [
                (f1[0] + j * f2[0], f1[1] + j * f2[1]),
                (Fraction(p) * f2[0], Fraction(p) * f2[1]),
            ]
            out.append(canonical_lattice(tuple(zip(*[list(c) for c in cols])), p))
        cols = [(f2[0], f2[1]), (Fraction(p) * f1[0], Fraction(p) * f1[1])]
        out.append(canonical_lattice(tuple(zip(*[list(c) for c in cols])), p))
        uniq = sorted(set(out))
        if len(uniq) != p + 1:
            raise RuntimeError("vertex star size mismatch")
        return uniq

    # -- facets ------------------------------------------------------------

    def chambers_of_edge(self, e: tuple) -> list[TreeFacet]:
        return [
            TreeFacet(kind="chamber", edge=e, pos=i) for i in range(self.refinement)
        ]

    def all_chambers(self) -> list[TreeFacet]:
        out = []
        for e in sorted(self.edges):
            out.extend(self.chambers_of_edge(e))
        return out

    def faces_of_chamber(self, c: TreeFacet) -> list[TreeFacet]:
        n = self.refinement
        a, b = c.edge
        out = []
        for endpos in (c.pos, c.pos + 1):
            if endpos == 0:
                out.append(TreeFacet(kind="point", vertex=a))
            elif endpos == n:
                out.append(TreeFacet(kind="point", vertex=b))
            else:
                out.append(TreeFacet(kind="point", edge=c.edge, pos=endpos))
        return out

    def faces_of(self, f: TreeFacet) -> list[TreeFacet]:
        if f.kind == "chamber":
            return [f] + self.faces_of_chamber(f)
        return [f]

    def chambers_containing_point(self, f: TreeFacet) -> list[TreeFacet]:
        out = []
        if f.vertex is not None:
            v = f.vertex
            for e in sorted(self.edges):
                if v not in e:
                    continue
                a, b = e
                pos = 0 if v == a else self.refinement - 1
                out.append(TreeFacet(kind="chamber", edge=e, pos=pos))
        else:
            out.append(TreeFacet(kind="chamber", edge=f.edge, pos=f.pos - 1))
            out.append(TreeFacet(kind="chamber", edge=f.edge, pos=f.pos))
        return out

    def chamber_neighbors(self, c: TreeFacet) -> list[TreeFacet]:
        out = []
        for pt in self.faces_of_chamber(c):
            for d in self.chambers_containing_point(pt):
                if d != c:
                    out.append(d)
        return out

    def heights_from(self, c0: TreeFacet) -> dict:
        out = {c0: 0}
        frontier = [c0]
        while frontier:
            nxt = []
            for c in frontier:
                for d in self.chamber_neighbors(c):
                    if d not in out:
                        out[d] = out[c] + 1
                        nxt.append(d)
            frontier = nxt
        return out

    def ball(self, c0: TreeFacet, m: int) -> list[TreeFacet]:
        hts = self.heights_from(c0)
        out = [c for c, h in hts.items() if h <= m]
        # interior check: every member's neighbors must be known
        for c in out:
            if hts[c] < m:
                for d in self.chamber_neighbors(c):
                    if d not in hts:
                        raise RuntimeError("tree radius too small for this ball")
        return sorted(out, key=lambda f: f.sort_key())

    def ball_facets(self, c0: TreeFacet, m: int) -> list[TreeFacet]:
        out = set()
        for c in self.ball(c0, m):
            out.update(self.faces_of(c))
        return sorted(out, key=lambda f: f.sort_key())

    def outward_faces(self, c0: TreeFacet, d: TreeFacet) -> tuple:
        """(children, parents) point-facets of a chamber w.r.t. the base."""
        hts = self.heights_from(c0)
        children, parents = [], []
        for pt in self.faces_of_chamber(d):
            nbs = [x for x in self.chambers_containing_point(pt) if x != d]
            if any(hts.get(x, 10**9) < hts[d] for x in nbs):
                parents.append(pt)
            else:
                children.append(pt)
        return tuple(children), tuple(parents)

    # -- frames ------------------------------------------------------------

    def support_vertices(self, f: TreeFacet) -> list[tuple]:
        if f.vertex is not None:
            return [f.vertex]
        return [f.edge[0], f.edge[1]]

    def tree_distance(self, v: tuple, w: tuple) -> int:
        if v == w:
            return 0
        seen = {v: 0}
        frontier = [v]
        while frontier:
            nxt = []
            for x in frontier:
                for y in self._adj.get(x, ()):
                    if y not in seen:
                        seen[y] = seen[x] + 1
                        if y == w:
                            return seen[y]
                        nxt.append(y)
            frontier = nxt
        raise RuntimeError("vertices not connected inside the enumerated tree")

    def _split_basis(self, v: tuple, w: tuple):
        """Find basis f1, f2 of v with w-lattice = span(f1, p^k f2)."""
        p = self.p
        k = self.tree_distance(v, w)
        bv = lattice_basis_from_canonical(v, p)
        bw = lattice_basis_from_canonical(w, p)
        # candidate f1: a primitive vector of v lying in w (up to scaling of w)
        # scale w so that w subset v with v/w cyclic of order p^k
        x = mat_mul(mat_inv(bv), bw)
        vals = [val_p(e, p) for row in x for e in row if e != 0]
        x = tuple(tuple(e / Fraction(p) ** min(vals) for e in row) for row in x)
        # now x columns generate a sublattice of Z^2 with elementary divisors 1, p^k
        # f1 = bv * (primitive column combination that is unimodular part)
        from itertools import product

        for c0w in range(2):
            col = [x[0][c0w], x[1][c0w]]
            if any(e != 0 and val_p(e, p) == 0 for e in col):
                other = [x[0][1 - c0w], x[1][1 - c0w]]
                f1_coords = col
                break
        else:
            raise RuntimeError("no primitive column")
        # complementary basis vector of Z^2 for f1_coords
        a, b = f1_coords
        if a != 0 and val_p(a, p) == 0:
            comp = [Fraction(0), Fraction(1)]
        else:
            comp = [Fraction(1), Fraction(0)]
        f1 = tuple(bv[i][0] * f1_coords[0] + bv[i][1] * f1_coords[1] for i in range(2))
        f2 = tuple(bv[i][0] * comp[0] + bv[i][1] * comp[1] for i in range(2))
        # adjust f2 modulo f1 so that p^k f2 lies in w
        # w contains f1 and has index p^k in v: w = span(f1, p^k f2 + t f1)?
        # solve for t in p-integers: p^k (f2 + (t/p^k) f1) in w
        bw_inv = mat_inv(lattice_basis_from_canonical(w, p))
        target = [Fraction(p) ** k * f for f in f2]
        coords = [
            bw_inv[0][0] * target[0] + bw_inv[0][1] * target[1],
            bw_inv[1][0] * target[0] + bw_inv[1][1] * target[1],
        ]
        f1_coords_w = [
            bw_inv[0][0] * f1[0] + bw_inv[0][1] * f1[1],
            bw_inv[1][0] * f1[0] + bw_inv[1][1] * f1[1],
        ]
        # find rational t with coords - t*f1_coords_w p-integral
        t = self._solve_correction(coords, f1_coords_w, p)
        f2 = tuple(f - (t / Fraction(p) ** k) * g for f, g in zip(f2, f1))
        return f1, f2

    def _solve_correction(self, coords, f1c, p: int):
        for i in range(2):
            if f1c[i] != 0:
                # choose t so that the i-th coordinate becomes integral;
                # try small corrections u * f1c with p-integral results
                pass
        # brute force small t = m with denominators bounded by the scales
        scales = [val_p(c, p) for c in coords if c != 0]
        depth = -min(scales + [0])
        mod = p**depth if depth > 0 else 1
        for num in range(mod):
            t = Fraction(num)
            ok = True
            for c, g in zip(coords, f1c):
                e = c - t * g
                if e != 0 and val_p(e, p) < 0:
                    ok = False
                    break
            if ok:
                return t
        raise RuntimeError("no correction found for smith basis")

    def frame_for_vertices(self, v: tuple, w: tuple) -> tuple:
        """Frame g (det-normalized in SL2 when possible) with
        g . (vertex at 0) = v and g . (vertex at -k) = w, k = distance."""
        if v == w:
            nb = self.vertex_neighbors(v)[0]
            w = nb
        f1, f2 = self._split_basis(v, w)
        g = ((f1[0], f2[0]), (f1[1], f2[1]))
        return self._normalize_frame(g)

    def _normalize_frame(self, g: Mat) -> Mat:
        """Scale columns by units and p-powers so that det(g) = +-p^0 or p."""
        from .groups import val_p as vp

        det = g[0][0] * g[1][1] - g[0][1] * g[1][0]
        k = vp(det, self.p)
        shift = k // 2
        scale = Fraction(self.p) ** shift
        g = tuple((a / scale, b) if False else (a, b) for a, b in g)
        g = tuple(tuple(x / scale for x in row) for row in g)
        det = g[0][0] * g[1][1] - g[0][1] * g[1][0]
        unit = det / Fraction(self.p) ** (k - 2 * shift)
        # divide the second column by the unit part
        g = tuple((row[0], row[1] / unit) for row in g)
        return g

    def position_in_frame(self, g: Mat, v: tuple) -> int:
        """Apartment coordinate x of a frame-apartment vertex.

        The lattice g.diag(p^m, 1).O^2 has filtration pattern
        val(g12) >= -x with x = -m in simple-root coordinates, so the
        canonical form's cotype converts with a sign.
        """
        p = self.p
        bv = lattice_basis_from_canonical(v, p)
        y = mat_mul(mat_inv(g), bv)
        form = canonical_lattice(y, p)
        pi, k, res = form
        if res != 0:
            raise RuntimeError("vertex not on the frame's apartment")
        return -k if pi == 1 else k

    def facet_points(self, g: Mat, f: TreeFacet) -> list:
        """Apartment coordinates (in the frame) of the facet's points."""
        n = self.refinement
        if f.vertex is not None:
            k = self.position_in_frame(g, f.vertex)
            return [vec([k])]
        a, b = f.edge
        ka = self.position_in_frame(g, a)
        kb = self.position_in_frame(g, b)
        if abs(ka - kb) != 1:
            raise RuntimeError("edge endpoints not adjacent in frame")
        lo = Fraction(f.pos, n)
        if f.kind == "chamber":
            x0 = Fraction(ka) + (Fraction(kb) - Fraction(ka)) * lo
            x1 = Fraction(ka) + (Fraction(kb) - Fraction(ka)) * Fraction(f.pos + 1, n)
            return [vec([x0]), vec([x1])]
        x = Fraction(ka) + (Fraction(kb) - Fraction(ka)) * lo
        return [vec([x])]

    def frame_for_facets(self, f1: TreeFacet, f2: TreeFacet) -> Mat:
        """A frame whose apartment contains both facets."""
        support = self.support_vertices(f1) + self.support_vertices(f2)
        best = None
        for v in support:
            for w in support:
                d = self.tree_distance(v, w)
                if best is None or d > best[0]:
                    best = (d, v, w)
        _, v, w = best
        g = self.frame_for_vertices(v, w)
        # verify all support vertices land on the frame's apartment
        for u in support:
            self.position_in_frame(g, u)
        return g
