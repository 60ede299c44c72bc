from fractions import Fraction

import pytest

from mpconv import characters as ch
from mpconv import mp_model as mp
from mpconv.apartment import Window
from mpconv.linalg import vec
from mpconv.root_data import UnsupportedSystemError

THIRD = Fraction(1, 3)


@pytest.fixture(scope="module")
def a2n3():
    return Window("A2", 3, Fraction(5, 2))


@pytest.fixture(scope="module")
def x0(a2n3):
    return a2n3.facet_of_point(vec([THIRD, THIRD]))


@pytest.fixture(scope="module")
def edge_e(a2n3):
    return a2n3.facet_of_point(vec([THIRD, Fraction(1, 2)]))


def quot(window, facet, r, q):
    return mp.quotient_lines(window, facet, r, q)


def test_chamber_every_character_cuspidal(a2n3):
    c = a2n3.facet_of_point(vec([Fraction(2, 5), Fraction(2, 5)]))
    for a in ch.enumerate_characters(quot(a2n3, c, THIRD, 2)):
        assert ch.is_cuspidal(a2n3, a)


def test_edge_no_cuspidal(a2n3, edge_e):
    for q in (2, 3):
        assert ch.enumerate_cuspidal(a2n3, edge_e, THIRD, q) == []


def test_x0_cuspidal_count(a2n3, x0):
    for q in (2, 3):
        cusp = ch.enumerate_cuspidal(a2n3, x0, THIRD, q)
        assert len(cusp) == (q - 1) ** 3
        for a in cusp:
            assert all(c != 0 for c in a.coeffs)


def test_criterion_agrees_with_definition(a2n3):
    facets = []
    for f in a2n3.enumerate_facets():
        try:
            a2n3.require_complete_star(f)
        except Exception:
            continue
        facets.append(f)
    assert facets
    for q in (2, 3):
        for f in facets:
            for a in ch.enumerate_characters(quot(a2n3, f, THIRD, q)):
                assert ch.criterion_check(a2n3, a) == ch.is_cuspidal(a2n3, a)


def test_inflation_roundtrip(a2n3, x0, edge_e):
    q = 3
    for b in ch.enumerate_characters(quot(a2n3, edge_e, THIRD, q)):
        a = ch.inflate_character(a2n3, b, x0)
        assert ch.is_inflation_of(a2n3, a, edge_e, b)
        assert ch.restrict_character(a2n3, a, edge_e) == b


def test_inflation_transitive(a2n3, x0, edge_e):
    q = 2
    chamber = a2n3.facet_of_point(vec([Fraction(2, 5), Fraction(2, 5)]))
    assert chamber.contains(edge_e) and edge_e.contains(x0)
    c = ch.enumerate_characters(quot(a2n3, chamber, THIRD, q))[0]
    b = ch.inflate_character(a2n3, c, edge_e)
    a_direct = ch.inflate_character(a2n3, c, x0)
    a_composed = ch.inflate_character(a2n3, b, x0)
    assert a_direct == a_composed
    assert ch.is_inflation_of(a2n3, a_composed, chamber, c)


def test_cuspidal_support_trivial_character(a2n3, x0):
    a = ch.zero_character(quot(a2n3, x0, THIRD, 2))
    (f, b), maximal = ch.cuspidal_support(a2n3, a)
    assert f.dim == 2
    assert b.is_zero()
    assert all(g.dim == 2 for g, _ in maximal)


def test_cuspidal_support_gamma_line(a2n3, x0):
    # supported on the (3,1) entry only: inflated from a chamber
    quotient = quot(a2n3, x0, THIRD, 2)
    idx = next(
        i for i, l in enumerate(quotient.lines) if l.gradient == (Fraction(-1), Fraction(-1))
    )
    coeffs = [0, 0, 0]
    coeffs[idx] = 1
    a = ch.MPCharacter(quotient, tuple(coeffs))
    (f, b), _ = ch.cuspidal_support(a2n3, a)
    assert f.dim == 2
    assert b.is_zero()


def test_cuspidal_support_of_cuspidal_is_self(a2n3, x0):
    a = ch.enumerate_cuspidal(a2n3, x0, THIRD, 2)[0]
    (f, b), maximal = ch.cuspidal_support(a2n3, a)
    assert f == x0 and b == a and len(maximal) == 1


@pytest.fixture(scope="module")
def a1win():
    return Window("A1", 1, Fraction(4))


def test_sl2_chamber_classes(a1win):
    classes = ch.associate_classes(a1win, Fraction(1), 3)
    ndim = {}
    chamber_classes = [
        cls for cls in classes if all(a.facet.dim == 1 for a in cls.members)
    ]
    trivial = [
        cls
        for cls in chamber_classes
        if any(a.is_zero() for a in cls.members)
    ]
    assert len(trivial) == 1
    nontrivial = [cls for cls in chamber_classes if cls not in trivial]
    # (q-1)/2 = 1 class of nontrivial chamber characters: A ~ -A
    assert len(nontrivial) == 1
    for cls in nontrivial:
        chamber = next(a.facet for a in cls.members)
        coeffs = cls.member_coeffs_at(chamber)
        assert {c[0] for c in coeffs} == {1, 2}


def test_sl2_chamber_pair_with_negative(a1win):
    # (F, A) ~ (F, -A) directly
    f = a1win.facet_of_point(vec([Fraction(1, 2)]))
    quotient = quot(a1win, f, Fraction(1), 3)
    a = ch.MPCharacter(quotient, (1,))
    classes = ch.associate_classes(a1win, Fraction(1), 3)
    cls = next(c for c in classes if a in c.members)
    assert a.negate() in cls.members


def test_building_cuspidality_at_tree_vertex(a1win):
    # split regular elements are cuspidal only apartment-locally; the
    # building-aware count at q=3 is the number of elliptic classes, 6
    v = a1win.facet_of_point(vec([0]))
    assert not ch.star_local(a1win, v)
    apartment = ch.enumerate_cuspidal(a1win, v, Fraction(1), 3)
    assert len(apartment) == 12
    building = [a for a in apartment if ch.is_cuspidal_building(a1win, a)]
    assert len(building) == 6


def test_star_local_at_interior_points():
    w = Window("A2", 3, Fraction(5, 2))
    x0 = w.facet_of_point(vec([THIRD, THIRD]))
    assert ch.star_local(w, x0)
    origin = w.facet_of_point(vec([0, 0]))
    assert not ch.star_local(w, origin)


@pytest.fixture(scope="module")
def a1half():
    return Window("A1", 2, Fraction(3))


def test_halfvertex_class_structure(a1half):
    r = Fraction(1, 2)
    classes = ch.associate_classes(a1half, r, 3)
    hv = a1half.facet_of_point(vec([Fraction(1, 2)]))
    nontrivial = [c for c in classes if hv.key in c.support_keys]
    assert len(nontrivial) == 4
    trivial = [c for c in classes if c not in nontrivial]
    assert len(trivial) == 1
    assert all(a.is_zero() for a in trivial[0].members)


def test_classes_partition_characters(a1half):
    r = Fraction(1, 2)
    classes = ch.associate_classes(a1half, r, 3)
    for x in [Fraction(1, 2), Fraction(1, 4), Fraction(0)]:
        f = a1half.facet_of_point(vec([x]))
        assert ch.partition_check(a1half, classes, f)


def test_chi_on_support_matches_members(a1half):
    classes = ch.associate_classes(a1half, Fraction(1, 2), 3)
    for cls in classes:
        f = next(a.facet for a in cls.members)
        chi = ch.chi_of_class(a1half, cls, f)
        assert {a.coeffs for a in chi} == cls.member_coeffs_at(f)


def test_unsupported_system_raises():
    w = Window("C2", 1, Fraction(2))
    with pytest.raises(UnsupportedSystemError):
        ch.associate_classes(w, Fraction(1), 3)
