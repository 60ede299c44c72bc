"""Sparse group-algebra elements over Q(zeta_p) and exact convolution.

An element stores one canonical representative and coefficient per right
coset of its invariance group; convolution refines the left factor's grid
to a subgroup fixed by both sides and accumulates exact translates.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional

from ..linalg import Mat, identity, mat_mul
from .cyclotomic import Cyclo
from .groups import FilteredGroup

CONV_BUDGET = 40_000_000


class OracleBudgetError(RuntimeError):
    pass


class GroupAlgebraElement:
    """Finite combination of right cosets of an invariance group."""

    def __init__(self, p: int, right: FilteredGroup, left: FilteredGroup, data=None):
        self.p = p
        self.right = right
        self.left = left
        self.data: dict = {}
        if data:
            for key, (rep, coeff) in data.items():
                if not coeff.is_zero():
                    self.data[key] = (rep, coeff)

    # -- construction ---------------------------------------------------

    @staticmethod
    def zero(p: int, right: FilteredGroup, left: Optional[FilteredGroup] = None):
        return GroupAlgebraElement(p, right, left or right, {})

    def copy(self) -> "GroupAlgebraElement":
        return GroupAlgebraElement(self.p, self.right, self.left, dict(self.data))

    def add_coset(self, rep: Mat, coeff: Cyclo) -> None:
        key = self.right.key(rep)
        if key in self.data:
            old_rep, old = self.data[key]
            total = old + coeff
            if total.is_zero():
                del self.data[key]
            else:
                self.data[key] = (old_rep, total)
        elif not coeff.is_zero():
            self.data[key] = (rep, coeff)

    def scale(self, x: Fraction) -> "GroupAlgebraElement":
        out = GroupAlgebraElement(self.p, self.right, self.left)
        for key, (rep, coeff) in self.data.items():
            out.data[key] = (rep, coeff.scale(x))
        return out

    def __add__(self, other: "GroupAlgebraElement") -> "GroupAlgebraElement":
        if not self.right.same_group(other.right):
            raise ValueError("cannot add elements on different coset grids")
        out = self.copy()
        for key, (rep, coeff) in other.data.items():
            out.add_coset(rep, coeff)
        out.left = self.left
        return out

    def __sub__(self, other: "GroupAlgebraElement") -> "GroupAlgebraElement":
        return self + other.scale(Fraction(-1))

    def is_zero(self) -> bool:
        return not self.data

    def equals(self, other: "GroupAlgebraElement") -> bool:
        if self.right.frame != other.right.frame or self.right.thresholds != other.right.thresholds:
            if not self.right.same_group(other.right):
                raise ValueError("cannot compare elements on different coset grids")
            rekeyed = GroupAlgebraElement(other.p, self.right, other.left)
            for _, (rep, coeff) in other.data.items():
                rekeyed.add_coset(rep, coeff)
            other = rekeyed
        if set(self.data) != set(other.data):
            return False
        return all(self.data[k][1] == other.data[k][1] for k in self.data)

    def value_at(self, x: Mat) -> Cyclo:
        key = self.right.key(x)
        got = self.data.get(key)
        return got[1] if got else Cyclo.zero(self.p)

    def support_size(self) -> int:
        return len(self.data)

    def check_right_invariance(self) -> bool:
        for gen in self.right.generators():
            for key, (rep, coeff) in self.data.items():
                moved = mat_mul(rep, gen)
                if self.right.key(moved) != key:
                    return False
        return True

    def check_left_invariance(self, group: FilteredGroup) -> bool:
        for gen in group.generators():
            for key, (rep, coeff) in self.data.items():
                moved = mat_mul(gen, rep)
                got = self.data.get(self.right.key(moved))
                if got is None or got[1] != coeff:
                    return False
        return True


def unit_idempotent(p: int, group: FilteredGroup) -> GroupAlgebraElement:
    """Normalized indicator e_H = 1_H / meas(H)."""
    out = GroupAlgebraElement(p, group, group)
    n = group.n
    out.add_coset(identity(n), Cyclo.rational(p, Fraction(1) / group.meas()))
    return out


def character_idempotent(
    p: int,
    group_r: FilteredGroup,
    group_rp: FilteredGroup,
    value_of: callable,
) -> GroupAlgebraElement:
    """e_{E,A}: character-weighted normalized indicator of the r-group.

    ``value_of(rep)`` must return the integer exponent of zeta_p at a
    transversal representative of group_r / group_rp.
    """
    out = GroupAlgebraElement(p, group_rp, group_rp)
    norm = Fraction(1) / group_r.meas()
    for rep in group_r.transversal_mod(group_rp):
        out.add_coset(rep, Cyclo.zeta_power(p, value_of(rep)).scale(norm))
    return out


def convolve(
    f: GroupAlgebraElement,
    g: GroupAlgebraElement,
    refine: FilteredGroup,
) -> GroupAlgebraElement:
    """Exact convolution; refine must lie inside f.right and g.left."""
    if not f.right.contains_group(refine):
        raise ValueError("refinement not inside the right invariance of f")
    if not g.left.contains_group(refine):
        raise ValueError("refinement not inside the left invariance of g")
    reps = f.right.transversal_mod(refine) if not f.right.same_group(refine) else [identity(f.right.n)]
    cost = len(f.data) * len(reps) * len(g.data)
    if cost > CONV_BUDGET:
        raise OracleBudgetError(
            f"convolution cost {cost} exceeds budget ({len(f.data)}x{len(reps)}x{len(g.data)})"
        )
    out = GroupAlgebraElement(f.p, g.right, f.left)
    w = refine.meas()
    for _, (y, fv) in sorted(f.data.items()):
        for t in reps:
            yt = mat_mul(y, t)
            for _, (u, gv) in sorted(g.data.items()):
                out.add_coset(mat_mul(yt, u), (fv * gv).scale(w))
    return out


def convolve_chain(elements, refines) -> GroupAlgebraElement:
    """Left-to-right convolution of a chain with given refinement groups."""
    acc = elements[0]
    for el, ref in zip(elements[1:], refines):
        acc = convolve(acc, el, ref)
    return acc
