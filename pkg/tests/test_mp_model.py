from fractions import Fraction

import pytest

from mpconv import mp_model as mp
from mpconv.apartment import Window
from mpconv.linalg import identity, mat_vec, vec
from mpconv.root_data import UnsupportedSystemError, VirtualAffineRoot

THIRD = Fraction(1, 3)
ALPHA = (Fraction(1), Fraction(0))
BETA = (Fraction(0), Fraction(1))
GAMMA = (Fraction(1), Fraction(1))


def neg(g):
    return tuple(-x for x in g)


@pytest.fixture(scope="module")
def a2n3():
    return Window("A2", 3, Fraction(3, 2))


@pytest.fixture(scope="module")
def x0(a2n3):
    return a2n3.facet_of_point(vec([THIRD, THIRD]))


@pytest.fixture(scope="module")
def edge_e(a2n3):
    return a2n3.facet_of_point(vec([THIRD, Fraction(1, 2)]))


def test_iwahori_support_a1():
    w = Window("A1", 1, Fraction(3))
    c0 = w.facet_of_point(vec([Fraction(1, 2)]))
    s = mp.group_support(w, c0, Fraction(0), strict=True)
    t = s.threshold_map()
    assert t[(Fraction(1),)] == 0 or t[(Fraction(1),)] == 1
    # one side has threshold 0, the other 1; the torus sits at depth 1
    vals = sorted(t.values())
    assert vals == [0, 1]
    assert s.torus == 1


def test_sl3_x0_quotient_lines(a2n3, x0):
    quot = mp.quotient_lines(a2n3, x0, THIRD, q=2)
    assert quot.torus_rank == 0
    assert set(quot.lines) == {
        VirtualAffineRoot(ALPHA, Fraction(0)),
        VirtualAffineRoot(BETA, Fraction(0)),
        VirtualAffineRoot(neg(GAMMA), Fraction(1)),
    }


def test_sl3_edge_quotient_line(a2n3, edge_e):
    quot = mp.quotient_lines(a2n3, edge_e, THIRD, q=2)
    assert quot.torus_rank == 0
    assert set(quot.lines) == {VirtualAffineRoot(ALPHA, Fraction(0))}


def test_depth_zero_rejected(a2n3, x0):
    with pytest.raises(ValueError):
        mp.quotient_lines(a2n3, x0, Fraction(0), q=2)


def test_sl2_vertex_dim_three():
    w = Window("A1", 1, Fraction(3))
    v = w.facet_of_point(vec([0]))
    quot = mp.quotient_lines(w, v, Fraction(1), q=3)
    assert quot.torus_rank == 1
    assert quot.dim == 3


def test_sl3_x0_iwahori_blocks_chambers(a2n3, x0):
    # the chamber with alpha, beta > 1/3 just above x0
    c = a2n3.facet_of_point(vec([Fraction(2, 5), Fraction(2, 5)]))
    pairs = a2n3.opposite_pairs(x0)
    partner = next(p for p in pairs if c in p)
    cbar = partner[0] if partner[1] == c else partner[1]
    blocks = mp.iwahori_blocks(a2n3, x0, c, cbar, THIRD)
    assert set(blocks.toward) == {
        VirtualAffineRoot(ALPHA, Fraction(0)),
        VirtualAffineRoot(BETA, Fraction(0)),
    }
    assert blocks.level == ()
    assert set(blocks.away) == {VirtualAffineRoot(neg(GAMMA), Fraction(1))}


def test_sl3_x0_iwahori_blocks_edges(a2n3, x0, edge_e):
    pairs = a2n3.opposite_pairs(x0)
    partner = next(p for p in pairs if edge_e in p)
    ebar = partner[0] if partner[1] == edge_e else partner[1]
    blocks = mp.iwahori_blocks(a2n3, x0, edge_e, ebar, THIRD)
    assert set(blocks.level) == {VirtualAffineRoot(ALPHA, Fraction(0))}
    assert set(blocks.toward) == {VirtualAffineRoot(BETA, Fraction(0))}
    assert set(blocks.away) == {VirtualAffineRoot(neg(GAMMA), Fraction(1))}


def test_sl3_edge_blocks_with_chambers(a2n3, edge_e):
    pairs = a2n3.opposite_pairs(edge_e)
    chambers = next(p for p in pairs if p[0].dim == 2)
    blocks = mp.iwahori_blocks(a2n3, edge_e, chambers[0], chambers[1], THIRD)
    dims = blocks.dims()
    assert sorted((dims[0], dims[2])) == [0, 1]
    assert dims[1] == 0


def test_phi_facet_extremes(a2n3, x0):
    assert len(mp.phi_facet(a2n3, x0, THIRD)) == 6
    c = a2n3.facet_of_point(vec([Fraction(2, 5), Fraction(2, 5)]))
    assert mp.phi_facet(a2n3, c, THIRD) == ()


def test_phi_disjoint_union(a2n3, x0):
    for f, fbar in a2n3.opposite_pairs(x0):
        phi_f, toward, away = mp.phi_blocks(a2n3, x0, f, fbar, THIRD)
        assert set(away) == {neg(g) for g in toward}
        whole = set(phi_f) | set(toward) | set(away)
        assert whole == set(mp.phi_facet(a2n3, x0, THIRD))
        assert len(phi_f) + len(toward) + len(away) == len(whole)


def test_dim_identity_windows():
    for label, refinement, r in [
        ("A2", 1, Fraction(1)),
        ("A2", 2, Fraction(1, 2)),
        ("C2", 1, Fraction(1)),
    ]:
        w = Window(label, refinement, Fraction(3, 2))
        interior = [
            f
            for f in w.enumerate_facets()
            if _star_ok(w, f)
        ]
        for e in interior[:40]:
            ve = mp.quotient_lines(w, e, r, q=2).dim
            for f, fbar in w.opposite_pairs(e):
                blocks = mp.iwahori_blocks(w, e, f, fbar, r)
                a, b, c = blocks.dims()
                assert a + b + c == ve


def _star_ok(w, f):
    from mpconv.apartment import WindowOverflowError

    try:
        w.require_complete_star(f)
        return True
    except WindowOverflowError:
        return False


def test_aligned_facets_same_lines():
    w = Window("A1", 1, Fraction(4))
    e1 = w.facet_of_point(vec([Fraction(1, 2)]))
    e2 = w.facet_of_point(vec([Fraction(5, 2)]))
    rep = w.convex_closure(e1, e2)
    assert rep.aligned
    l1 = mp.quotient_lines(w, e1, Fraction(1), q=3)
    l2 = mp.quotient_lines(w, e2, Fraction(1), q=3)
    assert l1.lines == l2.lines


def test_containment_chain():
    w = Window("A2", 3, Fraction(3, 2))
    e = w.facet_of_point(vec([THIRD, THIRD]))
    for f in w.vsph(e):
        ge = mp.group_support(w, e, THIRD, strict=False)
        gf = mp.group_support(w, f, THIRD, strict=False)
        ge_plus = mp.group_support(w, e, THIRD, strict=True)
        gf_plus = mp.group_support(w, f, THIRD, strict=True)
        assert ge.contains(gf)
        assert gf.contains(gf_plus)
        assert gf_plus.contains(ge_plus)


def test_log_index():
    from mpconv.root_data import build_root_system

    w = Window("A1", 1, Fraction(3))
    v = w.facet_of_point(vec([0]))
    g_r = mp.group_support(w, v, Fraction(1), strict=False)
    g_rp = mp.group_support(w, v, Fraction(1), strict=True)
    assert g_r.contains(g_rp)
    system = build_root_system("A1")
    # one line per root plus the torus: index q^3
    assert g_r.log_index(g_rp, system) == 3


def test_reductive_action_sl2_vertex():
    w = Window("A1", 1, Fraction(3))
    v = w.facet_of_point(vec([0]))
    model, gens = mp.reductive_generators(w, v, Fraction(1), 3)
    assert model.dim == 3
    # diag(t, t^{-1}) scales the alpha line by t^2
    t = gens[0]
    act = model.action_matrix(t)
    alpha_idx = next(
        i for i, l in enumerate(model.quotient.lines) if l.gradient == (Fraction(1),)
    )
    col = [act[r][alpha_idx] for r in range(model.dim)]
    expect = [0] * model.dim
    expect[alpha_idx] = pow(2, 2, 3)  # primitive unit is 2 mod 3
    assert col == expect
    # identity acts trivially
    assert model.action_matrix(identity(2)) == tuple(
        tuple(1 if i == j else 0 for j in range(3)) for i in range(3)
    )


def test_reductive_action_closed_under_composition():
    from mpconv.linalg import mat_mul

    w = Window("A1", 1, Fraction(3))
    v = w.facet_of_point(vec([0]))
    model, gens = mp.reductive_generators(w, v, Fraction(1), 3)
    for g in gens[:3]:
        for h in gens[:3]:
            lhs = model.action_matrix(mat_mul(g, h))
            a, b = model.action_matrix(g), model.action_matrix(h)
            prod = tuple(
                tuple(sum(a[i][k] * b[k][j] for k in range(model.dim)) % 3 for j in range(model.dim))
                for i in range(model.dim)
            )
            assert lhs == prod


def test_reductive_unsupported_type():
    w = Window("C2", 1, Fraction(3, 2))
    c = w.facet_of_point(vec([Fraction(1, 6), Fraction(1, 3)]))
    with pytest.raises(UnsupportedSystemError):
        mp.reductive_generators(w, c, Fraction(1), 3)
