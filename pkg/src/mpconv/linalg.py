"""Exact rational linear algebra helpers.

Everything in the package works over ``fractions.Fraction``; vectors are
tuples, matrices are tuples of row tuples.  Floats are never used: all the
geometric predicates downstream are sign tests that must be exact.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence

Vec = tuple[Fraction, ...]
Mat = tuple[Vec, ...]


def vec(xs: Iterable) -> Vec:
    return tuple(Fraction(x) for x in xs)


def mat(rows: Iterable[Iterable]) -> Mat:
    return tuple(vec(r) for r in rows)


def dot(x: Sequence[Fraction], y: Sequence[Fraction]) -> Fraction:
    if len(x) != len(y):
        raise ValueError("dimension mismatch")
    return sum((a * b for a, b in zip(x, y)), Fraction(0))


def vadd(x: Vec, y: Vec) -> Vec:
    return tuple(a + b for a, b in zip(x, y))


def vsub(x: Vec, y: Vec) -> Vec:
    return tuple(a - b for a, b in zip(x, y))


def vscale(c: Fraction, x: Vec) -> Vec:
    return tuple(c * a for a in x)


def vzero(n: int) -> Vec:
    return tuple(Fraction(0) for _ in range(n))


def centroid(points: Sequence[Vec]) -> Vec:
    n = len(points)
    if n == 0:
        raise ValueError("centroid of empty point set")
    acc = points[0]
    for p in points[1:]:
        acc = vadd(acc, p)
    return vscale(Fraction(1, n), acc)


def mat_vec(m: Mat, x: Vec) -> Vec:
    return tuple(dot(row, x) for row in m)


def mat_mul(a: Mat, b: Mat) -> Mat:
    bt = transpose(b)
    return tuple(tuple(dot(row, col) for col in bt) for row in a)


def transpose(m: Mat) -> Mat:
    return tuple(zip(*m))


def identity(n: int) -> Mat:
    return tuple(
        tuple(Fraction(1) if i == j else Fraction(0) for j in range(n)) for i in range(n)
    )


def mat_inv(m: Mat) -> Mat:
    """Invert an exact rational matrix by Gauss-Jordan elimination."""
    n = len(m)
    a = [list(row) + list(identity(n)[i]) for i, row in enumerate(m)]
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            raise ValueError("singular matrix")
        a[col], a[piv] = a[piv], a[col]
        inv = Fraction(1) / a[col][col]
        a[col] = [x * inv for x in a[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return tuple(tuple(row[n:]) for row in a)


def solve(m: Mat, b: Vec) -> Vec:
    """Solve m x = b for square nonsingular m."""
    return mat_vec(mat_inv(m), b)


def rank(rows: Sequence[Sequence[Fraction]]) -> int:
    a = [list(r) for r in rows]
    nrows = len(a)
    ncols = len(a[0]) if a else 0
    r = 0
    for col in range(ncols):
        piv = next((i for i in range(r, nrows) if a[i][col] != 0), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        for i in range(nrows):
            if i != r and a[i][col] != 0:
                f = a[i][col] / a[r][col]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        r += 1
        if r == nrows:
            break
    return r


def affine_reflection(gradient: Vec, constant: Fraction, gram_inv: Mat):
    """Return (matrix, shift) for the reflection across {<gradient,x>+constant=0}.

    The reflection is orthogonal for the inner product whose *inverse* Gram
    matrix (on functionals) is ``gram_inv``; it maps x to
    x - 2 psi(x)/<g,g> * g_vec where g_vec is the metric dual of the gradient.
    """
    gvec = mat_vec(gram_inv, gradient)
    gg = dot(gradient, gvec)
    if gg == 0:
        raise ValueError("gradient has zero length")
    n = len(gradient)
    c = Fraction(2) / gg
    matrix = tuple(
        tuple((Fraction(1) if i == j else Fraction(0)) - c * gvec[i] * gradient[j] for j in range(n))
        for i in range(n)
    )
    shift = vscale(-c * constant, gvec)
    return matrix, shift


def feasible(
    eqs: Sequence[tuple[Vec, Fraction]],
    ineqs: Sequence[tuple[Vec, Fraction]],
    nvars: int,
) -> bool:
    """Exact feasibility of {a.x = b} and {a.x <= b} by Fourier-Motzkin.

    Intended for tiny systems (<= 6 variables); eliminates equalities by
    substitution first, then inequality variables one at a time.
    """
    eq = [(list(a), Fraction(b)) for a, b in eqs]
    ine = [(list(a), Fraction(b)) for a, b in ineqs]

    # Substitute equalities away.
    while eq:
        a, b = eq.pop()
        j = next((k for k in range(nvars) if a[k] != 0), None)
        if j is None:
            if b != 0:
                return False
            continue
        coef = a[j]
        # x_j = (b - sum_{k!=j} a_k x_k) / coef; substitute in the rest.
        def subst(row, rhs):
            f = row[j] / coef
            new = [row[k] - f * a[k] for k in range(nvars)]
            new[j] = Fraction(0)
            return new, rhs - f * b
        eq = [subst(r, c) for r, c in eq]
        ine = [subst(r, c) for r, c in ine]

    # Fourier-Motzkin on the inequalities.
    for j in range(nvars):
        pos = [(a, b) for a, b in ine if a[j] > 0]
        neg = [(a, b) for a, b in ine if a[j] < 0]
        rest = [(a, b) for a, b in ine if a[j] == 0]
        new = list(rest)
        for ap, bp in pos:
            for an, bn in neg:
                # combine ap/ap[j] and an/(-an[j])
                row = [ap[k] / ap[j] - an[k] / an[j] for k in range(nvars)]
                rhs = bp / ap[j] - bn / an[j]
                row[j] = Fraction(0)
                new.append((row, rhs))
        ine = new
    return all(b >= 0 for a, b in ine if all(x == 0 for x in a))


def hnf_residue(basis: Sequence[Sequence[Fraction]], v: Sequence[Fraction]) -> Vec:
    """Canonical representative of v modulo the full-rank lattice spanned by basis.

    All entries must be p-local rationals (any common-denominator rationals
    work); the residue is computed via an integer Hermite normal form after
    clearing denominators, so equal cosets always reduce to equal tuples.
    """
    n = len(v)
    dens = [x.denominator for row in basis for x in row]
    dens += [x.denominator for x in v]
    scale = 1
    for d in dens:
        scale = scale * d // _gcd(scale, d)
    cols = [[int(x * scale) for x in row] for row in basis]
    target = [int(x * scale) for x in v]
    h = _hnf_columns(cols, n)
    out = list(target)
    for i in range(n):
        piv = h[i][i]
        q = out[i] // piv
        if q:
            for k in range(i, n):
                out[k] -= q * h[i][k]
    return tuple(Fraction(x, scale) for x in out)


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return abs(a)


def _hnf_columns(cols: list[list[int]], n: int) -> list[list[int]]:
    """Lower-triangular HNF of the lattice spanned by integer column vectors.

    Returns rows h[0..n-1] with h[i][i] > 0 and h[i][k] = 0 for k < i, such
    that the rows span the same lattice.  (Rows here are the triangularized
    generators, pivot in position i.)
    """
    gens = [list(c) for c in cols]
    out: list[list[int]] = []
    for i in range(n):
        # gens currently all have zeros in coordinates < i
        nz = [g for g in gens if g[i] != 0]
        zs = [g for g in gens if g[i] == 0]
        if not nz:
            raise ValueError("lattice not full rank")
        while len(nz) > 1:
            nz.sort(key=lambda g: abs(g[i]))
            a = nz[0]
            rest = []
            for g in nz[1:]:
                q = g[i] // a[i]
                ng = [x - q * y for x, y in zip(g, a)]
                if ng[i] != 0:
                    rest.append(ng)
                else:
                    zs.append(ng)
            nz = [a] + rest
        piv = nz[0]
        if piv[i] < 0:
            piv = [-x for x in piv]
        out.append(piv)
        gens = zs
    # Reduce entries above each pivot so representatives are canonical.
    for i in range(n):
        for j in range(i):
            q = out[j][i] // out[i][i]
            if q:
                out[j] = [x - q * y for x, y in zip(out[j], out[i])]
    return out
