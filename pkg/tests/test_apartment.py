from fractions import Fraction

import pytest

from mpconv.apartment import Window, WindowOverflowError
from mpconv.linalg import vec
from mpconv.root_data import build_root_system


@pytest.fixture(scope="module")
def a2n3():
    return Window("A2", 3, Fraction(3, 2))


@pytest.fixture(scope="module")
def a1n1():
    return Window("A1", 1, Fraction(3))


def test_a1_window_counts():
    w = Window("A1", 1, Fraction(2), center=vec([1]))
    # window [-1, 3]: vertices at -1..3, edges between
    assert len(w.enumerate_facets(dim=0)) == 5
    assert len(w.enumerate_facets(dim=1)) == 4


def test_a2_refined_chamber_count(a2n3):
    # the base alcove subdivides into 9 refined chambers
    base_alcove = [
        c
        for c in a2n3.chambers
        if all(
            x >= 0 and sum(v) <= 1
            for v in c.vertices
            for x in v
        )
        and all(v[0] + v[1] <= 1 for v in c.vertices)
    ]
    assert len(base_alcove) == 9


def test_facet_of_point_examples(a2n3):
    x0 = vec([Fraction(1, 3), Fraction(1, 3)])
    f = a2n3.facet_of_point(x0)
    assert f.dim == 0
    e = a2n3.facet_of_point(vec([Fraction(1, 3), Fraction(1, 2)]))
    assert e.dim == 1
    with pytest.raises(WindowOverflowError):
        a2n3.facet_of_point(vec([50, 50]))


def test_keys_reproduce_facets(a2n3):
    for f in a2n3.enumerate_facets():
        assert a2n3.facet_of_point(f.interior_point) == f


def test_facet_dim_matches_zero_signs(a2n3):
    from mpconv.linalg import rank as mat_rank

    for f in a2n3.enumerate_facets():
        zero_grads = [
            list(a2n3.hyperplanes[i].gradient)
            for i, s in enumerate(f.key)
            if s == 0
        ]
        expected = 2 - (mat_rank(zero_grads) if zero_grads else 0)
        assert f.dim == expected


def test_star_of_refined_vertex(a2n3):
    x0 = a2n3.facet_of_point(vec([Fraction(1, 3), Fraction(1, 3)]))
    star = a2n3.vsph(x0)
    assert len([f for f in star if f.dim == 2]) == 6
    assert len([f for f in star if f.dim == 1]) == 6


def test_star_of_chamber_empty(a2n3):
    c = a2n3.facet_of_point(vec([Fraction(4, 9), Fraction(4, 9)]))
    assert c.dim == 2
    assert a2n3.vsph(c) == []


def test_vertex_star_a1(a1n1):
    v = a1n1.facet_of_point(vec([0]))
    assert len(a1n1.vsph(v)) == 2


def test_star_overflow_detected():
    w = Window("A1", 1, Fraction(2))
    boundary_vertex = w.facet_of_point(vec([2]))
    with pytest.raises(WindowOverflowError):
        w.vsph(boundary_vertex)


def test_convex_closure_trivial(a2n3):
    e = a2n3.facet_of_point(vec([Fraction(1, 3), Fraction(1, 2)]))
    rep = a2n3.convex_closure(e, e)
    assert rep.aligned
    assert rep.d_e == e
    assert rep.dim == e.dim
    assert set(rep.facets) == set(a2n3.faces_of(e))


def test_convex_closure_two_edges(a1n1):
    left = a1n1.facet_of_point(vec([Fraction(-1, 2)]))
    right = a1n1.facet_of_point(vec([Fraction(1, 2)]))
    rep = a1n1.convex_closure(left, right)
    assert rep.dim == 1
    assert rep.aligned
    assert rep.d_e == left and rep.d_f == right
    dims = sorted(f.dim for f in rep.facets)
    assert dims == [0, 0, 0, 1, 1]


def test_convex_closure_symmetry(a2n3):
    e = a2n3.facet_of_point(vec([Fraction(1, 3), Fraction(1, 2)]))
    c = a2n3.facet_of_point(vec([Fraction(4, 9), Fraction(4, 9)]))
    r1 = a2n3.convex_closure(e, c)
    r2 = a2n3.convex_closure(c, e)
    assert set(r1.facets) == set(r2.facets)
    assert r1.d_e == r2.d_f and r1.d_f == r2.d_e
    assert r1.e_subaligned_to_f
    assert r1.dim == 2


def test_opposite_pairs_a1_vertex(a1n1):
    v = a1n1.facet_of_point(vec([0]))
    pairs = a1n1.opposite_pairs(v)
    assert len(pairs) == 1
    f, g = pairs[0]
    assert {f.interior_point[0], g.interior_point[0]} == {Fraction(1, 2), Fraction(-1, 2)}


def test_opposite_pairs_x0(a2n3):
    x0 = a2n3.facet_of_point(vec([Fraction(1, 3), Fraction(1, 3)]))
    pairs = a2n3.opposite_pairs(x0)
    chambers = [p for p in pairs if p[0].dim == 2]
    edges = [p for p in pairs if p[0].dim == 1]
    assert len(chambers) == 3
    assert len(edges) == 3
    # every star member shows up in exactly one pair
    star = a2n3.vsph(x0)
    seen = [f for p in pairs for f in p]
    assert sorted(f.key for f in seen) == sorted(f.key for f in star)


def test_coarse_facet(a2n3):
    c = a2n3.facet_of_point(vec([Fraction(4, 9), Fraction(4, 9)]))
    coarse = a2n3.coarse_facet(c)
    assert coarse.dim == 2
    # the big alcove: contains the point with margin
    assert coarse.interior_point == vec([Fraction(1, 3), Fraction(1, 3)])


def test_c2_chamber_has_three_walls():
    w = Window("C2", 1, Fraction(3, 2))
    c = w.facet_of_point(vec([Fraction(1, 6), Fraction(1, 3)]))
    assert c.dim == 2
    assert len(w.chamber_walls(c)) == 3
    neighbors = [w.adjacent_chamber(c, f) for f in w.chamber_walls(c)]
    assert sum(n is not None for n in neighbors) == 3


def test_bc2_refined_similarity():
    # The N=2 refinement of the BC tables is the N=1 complex scaled by 1/2.
    w1 = Window("BC1", 1, Fraction(1))
    w2 = Window("BC1", 2, Fraction(1, 2))
    pts1 = sorted(h.constant for h in w1.hyperplanes)
    pts2 = sorted(h.constant for h in w2.hyperplanes)
    halves = sorted(c / 2 for c in pts1)
    assert set(halves) <= set(pts2)
    verts1 = sorted(v[0] for f in w1.enumerate_facets(dim=0) for v in f.vertices)
    verts2 = sorted(v[0] for f in w2.enumerate_facets(dim=0) for v in f.vertices)
    assert [v / 2 for v in verts1] == [v for v in verts2 if abs(v) <= Fraction(1, 2)]
