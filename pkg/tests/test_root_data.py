from fractions import Fraction

import pytest

from mpconv.linalg import identity, mat, mat_mul, mat_vec, vec
from mpconv.root_data import (
    UnsupportedSystemError,
    VirtualAffineRoot,
    build_root_system,
    enumerate_virtual_roots,
)


@pytest.mark.parametrize(
    "label,nroots,weyl_order",
    [
        ("A1", 2, 2),
        ("A2", 6, 6),
        ("A3", 12, 24),
        ("C2", 8, 8),
        ("G2", 12, 12),
        ("BC1", 4, 2),
        ("BC2", 12, 8),
    ],
)
def test_system_tables(label, nroots, weyl_order):
    rs = build_root_system(label)
    assert len(rs.roots) == nroots
    assert len(rs.weyl_elements) == weyl_order
    neg = {tuple(-x for x in g) for g in rs.positive_roots}
    assert set(rs.roots) == set(rs.positive_roots) | neg


def test_weyl_group_closed_and_permutes_roots():
    rs = build_root_system("C2")
    elements = set(rs.weyl_elements)
    for w in rs.weyl_elements:
        for v in rs.weyl_elements:
            assert mat_mul(w, v) in elements
        images = {rs.weyl_on_functional(w, g) for g in rs.roots}
        assert images == set(rs.roots)


def test_g2_highest_root_height():
    rs = build_root_system("G2")
    assert rs.highest_root_height == 5


def test_a2_unsupported_rank():
    with pytest.raises(UnsupportedSystemError):
        build_root_system("A2", rank=3)
    with pytest.raises(UnsupportedSystemError):
        build_root_system("F4")


def test_bc1_affine_roots_match_tables():
    rs = build_root_system("BC1-echelonnage", rank=1)
    long_root = vec([2])
    short_root = vec([1])
    # long constants are half-integers shifted: c + 1/2 with c integral
    assert rs.is_true_constant(long_root, Fraction(1, 2))
    assert rs.is_true_constant(long_root, Fraction(-3, 2))
    assert not rs.is_true_constant(long_root, Fraction(1))
    assert not rs.is_true_constant(long_root, Fraction(1, 4))
    # short constants are c/2 with c integral
    assert rs.is_true_constant(short_root, Fraction(1, 2))
    assert rs.is_true_constant(short_root, Fraction(2))
    assert not rs.is_true_constant(short_root, Fraction(1, 4))
    # shift by one stays inside the system
    for g, c in [(long_root, Fraction(1, 2)), (short_root, Fraction(3, 2))]:
        assert rs.is_true_constant(g, c + 1)


def test_bc2_refined_constants_at_two():
    rs = build_root_system("BC2")
    long_root = vec([2, 0])
    # 2e_i + c + 1/4 with c half-integer
    assert rs.is_virtual_constant(long_root, Fraction(1, 4), 2)
    assert rs.is_virtual_constant(long_root, Fraction(3, 4), 2)
    assert not rs.is_virtual_constant(long_root, Fraction(1, 2), 2)
    mixed = vec([1, -1])
    assert rs.is_virtual_constant(mixed, Fraction(1, 4), 2)


def test_virtual_root_enumeration_a1():
    rs = build_root_system("A1")
    roots = enumerate_virtual_roots(rs, 2, vec([0]), Fraction(1))
    alpha = vec([1])
    constants = sorted(p.constant for p in roots if p.gradient == alpha)
    assert constants == [Fraction(-1), Fraction(-1, 2), Fraction(0), Fraction(1, 2), Fraction(1)]


def test_virtual_plus_step_stays_admissible():
    for label, refinement in [("A2", 3), ("BC1", 2), ("BC2", 1)]:
        rs = build_root_system(label)
        roots = enumerate_virtual_roots(rs, refinement, vec([0] * rs.rank), Fraction(1))
        for p in roots:
            if p.is_constant:
                continue
            assert rs.is_virtual_constant(
                p.gradient, p.constant + Fraction(1, refinement), refinement
            )


def test_ceiling_lift_idempotent_and_examples():
    rs = build_root_system("A2")
    gamma = vec([1, 1])
    lifted = rs.ceiling_lift(VirtualAffineRoot(gamma, Fraction(-1, 3)))
    assert lifted.constant == 0
    again = rs.ceiling_lift(lifted)
    assert again == lifted
    neg = tuple(-x for x in gamma)
    assert rs.ceiling_lift(VirtualAffineRoot(neg, Fraction(2, 3))).constant == 1
    alpha = vec([1, 0])
    assert rs.ceiling_lift(VirtualAffineRoot(alpha, Fraction(1))).constant == 1


def test_bc_no_divisible_virtual_roots():
    # For the ramified odd unitary tables psi/2 never lands back in the system.
    rs = build_root_system("BC1")
    for refinement in (1, 2):
        roots = enumerate_virtual_roots(rs, refinement, vec([0]), Fraction(2))
        assert all(not rs.is_divisible_virtual(p, refinement) for p in roots)


def test_motion_translation_lattice_guard():
    rs = build_root_system("A1")
    with pytest.raises(ValueError):
        rs.motion(identity(1), vec([1]))
    m = rs.motion(identity(1), vec([2]))
    assert m.apply_point(vec([0])) == vec([2])
    psi = VirtualAffineRoot(vec([1]), Fraction(0))
    assert m.apply_functional(psi).constant == -2


def test_motion_group_laws():
    rs = build_root_system("A2")
    w = rs.reflection_matrix(vec([1, 0]))
    t = vec(rs.simple_coroots[0])
    m = rs.motion(w, t)
    minv = m.inverse()
    x = vec([Fraction(1, 3), Fraction(5, 7)])
    assert minv.apply_point(m.apply_point(x)) == x
    both = m.compose(minv)
    assert both.apply_point(x) == x


def test_gram_invariance():
    rs = build_root_system("G2")
    for w in rs.weyl_elements:
        wt = tuple(zip(*w))
        assert mat_mul(mat_mul(wt, rs.gram), w) == rs.gram
