"""Exact arithmetic in Q(zeta_p), p prime.

Elements are coefficient tuples in the power basis 1, zeta, ..., zeta^{p-2}
with zeta^{p-1} = -(1 + zeta + ... + zeta^{p-2}); character sums must cancel
exactly, so no floating point ever appears.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction


@dataclass(frozen=True)
class Cyclo:
    p: int
    coeffs: tuple

    @staticmethod
    def zero(p: int) -> "Cyclo":
        return Cyclo(p, tuple(Fraction(0) for _ in range(p - 1)))

    @staticmethod
    def one(p: int) -> "Cyclo":
        return Cyclo.rational(p, Fraction(1))

    @staticmethod
    def rational(p: int, x: Fraction) -> "Cyclo":
        coeffs = [Fraction(0)] * (p - 1)
        coeffs[0] = Fraction(x)
        return Cyclo(p, tuple(coeffs))

    @staticmethod
    def zeta_power(p: int, k: int) -> "Cyclo":
        k %= p
        coeffs = [Fraction(0)] * (p - 1)
        if k < p - 1:
            coeffs[k] = Fraction(1)
        else:
            coeffs = [Fraction(-1)] * (p - 1)
        return Cyclo(p, tuple(coeffs))

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)

    def __add__(self, other: "Cyclo") -> "Cyclo":
        return Cyclo(self.p, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other: "Cyclo") -> "Cyclo":
        return Cyclo(self.p, tuple(a - b for a, b in zip(self.coeffs, other.coeffs)))

    def __neg__(self) -> "Cyclo":
        return Cyclo(self.p, tuple(-a for a in self.coeffs))

    def scale(self, x: Fraction) -> "Cyclo":
        return Cyclo(self.p, tuple(a * Fraction(x) for a in self.coeffs))

    def __mul__(self, other: "Cyclo") -> "Cyclo":
        p = self.p
        raw = [Fraction(0)] * p  # exponents 0..p-1
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                if b == 0:
                    continue
                raw[(i + j) % p] += a * b
        # fold zeta^{p-1} = -(1 + ... + zeta^{p-2})
        out = list(raw[: p - 1])
        top = raw[p - 1]
        if top != 0:
            out = [c - top for c in out]
        return Cyclo(p, tuple(out))
