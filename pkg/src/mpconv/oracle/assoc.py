"""Associate classes versus honest conjugation orbits (rank one)."""

from __future__ import annotations

from fractions import Fraction
from typing import Optional

from ..apartment import Window, WindowOverflowError
from ..characters import (
    associate_classes,
    enumerate_cuspidal,
    is_cuspidal_building,
    star_local,
)
from ..linalg import Mat, identity, mat, mat_inv, mat_mul, vec
from .checks import CheckRow
from .realize import Realizer


def _motions(p: int):
    """Exact SL2 motions generating the apartment symmetries: the Weyl flip
    and coroot translations (apartment shift by two)."""
    s = mat([[0, 1], [-1, 0]])
    t = mat([[Fraction(1, p), 0], [0, Fraction(p)]])
    tinv = mat_inv(t)
    return [(s, lambda x: -x), (t, lambda x: x + 2), (tinv, lambda x: x - 2)]


def oracle_refined_classes(window: Window, r: Fraction, p: int):
    """Union-find of cuspidal pairs under Ad-orbits and exact transports."""
    rz = Realizer(window, r, p)
    pairs = {}
    facets = []
    for f in window.enumerate_facets():
        try:
            window.require_complete_star(f)
        except WindowOverflowError:
            continue
        facets.append(f)
    for f in facets:
        local = star_local(window, f)
        for a in enumerate_cuspidal(window, f, r, p):
            if local or is_cuspidal_building(window, a):
                pairs[(f.key, a.coeffs)] = (f, a.coeffs)

    parent = {k: k for k in pairs}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(x, y):
        rx, ry = find(x), find(y)
        if rx != ry:
            parent[max(rx, ry)] = min(rx, ry)

    # honest parahoric conjugation orbits per facet
    for (fkey, coeffs), (f, _) in list(pairs.items()):
        for img in rz.ad_orbit(f, coeffs):
            other = (fkey, img)
            if other in pairs:
                union((fkey, coeffs), other)

    # alignment transport: canonical identification along a common span
    from ..characters import _aligned_partners

    for (fkey, coeffs), (f, _) in list(pairs.items()):
        for f2 in _aligned_partners(window, f):
            other = (f2.key, coeffs)
            if other in pairs:
                union((fkey, coeffs), other)

    # exact matrix transports along the apartment
    for (fkey, coeffs), (f, _) in list(pairs.items()):
        for g, point_map in _motions(p):
            img_pts = [vec([point_map(v[0])]) for v in f.vertices]
            if not all(window.in_box(x) for x in img_pts):
                continue
            try:
                f2 = window.facet_of_point(
                    vec([point_map(f.interior_point[0])])
                )
            except WindowOverflowError:
                continue
            if set(f2.vertices) != set(img_pts):
                continue
            new_coeffs = rz.transport_coeffs(f, f2, g, coeffs)
            other = (f2.key, new_coeffs)
            if other in pairs:
                union((fkey, coeffs), other)

    groups = {}
    for k in pairs:
        groups.setdefault(find(k), set()).add(k)
    return sorted(frozenset(v) for v in groups.values())


def check_associate_example(p: int = 3) -> CheckRow:
    """(F,A) ~ (F,-A) for chamber characters, while Ad-orbits keep them apart."""
    window = Window("A1", 1, Fraction(5))
    r = Fraction(1)
    classes = associate_classes(window, r, p)
    f = window.facet_of_point(vec([Fraction(1, 2)]))
    ok = True
    witness = None
    from ..mp_model import quotient_lines
    from ..characters import MPCharacter

    quot = quotient_lines(window, f, r, p)
    a = MPCharacter(quot, (1,))
    cls = next(c for c in classes if a in c.members)
    if a.negate() not in cls.members:
        ok, witness = False, {"missing": "negated member"}
    rz = Realizer(window, r, p)
    orbit = rz.ad_orbit(f, (1,))
    if p != 2 and (p - 1,) in orbit:
        ok, witness = False, {"orbit": "contains -A"}
    return CheckRow(
        "associate.example",
        {"p": p, "N": 1, "r": "1"},
        "PASS" if ok else "FAIL",
        witness,
    )


def check_classes_match_oracle(p: int, refinement: int, r: Fraction) -> CheckRow:
    """Symbolic classes coincide with the oracle-orbit-refined partition."""
    window = Window("A1", refinement, Fraction(5))
    symbolic = associate_classes(window, r, p)
    sym_partition = sorted(
        frozenset((a.facet.key, a.coeffs) for a in cls.members) for cls in symbolic
    )
    oracle = oracle_refined_classes(window, r, p)
    ok = sym_partition == oracle
    witness = None
    if not ok:
        witness = {
            "symbolic": [len(s) for s in sym_partition],
            "oracle": [len(s) for s in oracle],
        }
    return CheckRow(
        "associate.match",
        {"p": p, "N": refinement, "r": str(r)},
        "PASS" if ok else "FAIL",
        witness,
    )
