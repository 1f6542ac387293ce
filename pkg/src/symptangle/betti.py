"""Exact Poincare-series arithmetic and the Betti-number formulas.

Everything here is integer (or rational) arithmetic on truncated power
series in ``t``; no floating point is involved.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from math import comb, factorial, prod

from .errors import BadMultiplicity, InvalidRank, OutOfAlcove, UnsupportedChamber


@dataclass(frozen=True)
class PolySeries:
    """Power series ``sum c_k t^k`` known exactly up to ``t^truncation``."""

    coeffs: tuple
    truncation: int

    def __post_init__(self):
        cs = list(self.coeffs[: self.truncation + 1])
        cs += [0] * (self.truncation + 1 - len(cs))
        cs = [int(c) if isinstance(c, Fraction) and c.denominator == 1 else c for c in cs]
        object.__setattr__(self, "coeffs", tuple(cs))

    @classmethod
    def polynomial(cls, coeffs, truncation=None):
        coeffs = list(coeffs)
        while len(coeffs) > 1 and coeffs[-1] == 0:
            coeffs.pop()
        if truncation is None:
            truncation = len(coeffs) - 1
        return cls(tuple(coeffs), truncation)

    @classmethod
    def monomial(cls, degree, coefficient=1, truncation=0):
        truncation = max(truncation, degree)
        cs = [0] * (truncation + 1)
        cs[degree] = coefficient
        return cls(tuple(cs), truncation)

    def _common(self, other):
        if not isinstance(other, PolySeries):
            other = PolySeries((other,), self.truncation)
        return min(self.truncation, other.truncation), other

    def __add__(self, other):
        n, other = self._common(other)
        return PolySeries(tuple(a + b for a, b in zip(self.coeffs[: n + 1], other.coeffs[: n + 1])), n)

    def __neg__(self):
        return PolySeries(tuple(-c for c in self.coeffs), self.truncation)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, PolySeries):
            return PolySeries(tuple(c * other for c in self.coeffs), self.truncation)
        n = min(self.truncation, other.truncation)
        out = [0] * (n + 1)
        for i, a in enumerate(self.coeffs[: n + 1]):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs[: n + 1 - i]):
                out[i + j] += a * b
        return PolySeries(tuple(out), n)

    __rmul__ = __mul__

    def __pow__(self, k):
        result = PolySeries((1,), self.truncation)
        for _ in range(k):
            result = result * self
        return result

    def div_one_minus(self, k):
        """Divide by ``1 - t^k`` via the truncated geometric series."""
        out = list(self.coeffs)
        for d in range(k, self.truncation + 1):
            out[d] += out[d - k]
        return PolySeries(tuple(out), self.truncation)

    def with_truncation(self, truncation):
        return PolySeries(self.coeffs, truncation)

    def degree(self):
        """Largest index with a non-zero coefficient (-1 for the zero series)."""
        for d in range(self.truncation, -1, -1):
            if self.coeffs[d] != 0:
                return d
        return -1

    def trimmed(self):
        d = max(self.degree(), 0)
        return tuple(self.coeffs[: d + 1])

    def is_palindromic(self):
        cs = self.trimmed()
        return cs == cs[::-1]

    def evaluate(self, t):
        return sum(c * t**k for k, c in enumerate(self.coeffs))

    def __str__(self):
        return format_poly(self.trimmed())


def format_poly(coeffs, var="t"):
    """Human form, e.g. ``1 + 5t^2 + t^4``."""
    terms = []
    for k, c in enumerate(coeffs):
        if c == 0:
            continue
        if k == 0:
            terms.append(str(c))
            continue
        mono = var if k == 1 else f"{var}^{k}"
        terms.append(mono if c == 1 else f"{c}{mono}")
    return " + ".join(terms).replace("+ -", "- ") if terms else "0"


def default_truncation(n):
    return 4 * (n - 3) + 4


def _odd_guard(n, truncation):
    if n < 3 or n % 2 == 0:
        raise UnsupportedChamber(f"n={n}: the formulas are only applied for odd n >= 3")
    if truncation is None:
        truncation = default_truncation(n)
    if truncation < 2 * (n - 3):
        raise ValueError(f"truncation {truncation} below the expected degree {2 * (n - 3)}")
    return truncation


def one_plus_t2_power(n, truncation):
    return PolySeries.polynomial([1, 0, 1], truncation) ** n


def kirwan_poincare(n, truncation=None):
    """Kirwan's formula for ``M_n(mu)``, ``mu < 1/n`` (GIT quotient of ``(P^1)^n``)."""
    truncation = _odd_guard(n, truncation)
    total = one_plus_t2_power(n, truncation).div_one_minus(4)
    for k in range(n // 2 + 1, n + 1):
        term = PolySeries.monomial(2 * (k - 1), comb(n, k), truncation).div_one_minus(2)
        total = total - term
    return total


def ab_poincare(n, truncation=None):
    """Atiyah-Bott formula at ``mu = 1/4`` (equivariant term minus unstable strata)."""
    truncation = _odd_guard(n, truncation)
    first = one_plus_t2_power(n, truncation).div_one_minus(2).div_one_minus(4)
    unstable = PolySeries.monomial(n - 1, 2 ** (n - 1), truncation).div_one_minus(2).div_one_minus(2)
    return first - unstable


def _poly_mul(a, b):
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


def q_integer(k):
    """``[k]_q = 1 + q + ... + q^(k-1)`` with ``q = t^2``, as a coefficient list in ``t``."""
    cs = [0] * (2 * k - 1)
    for j in range(k):
        cs[2 * j] = 1
    return cs


def q_factorial(k):
    out = [1]
    for j in range(1, k + 1):
        out = _poly_mul(out, q_integer(j))
    return out


def poly_divide_exact(num, den):
    """Exact long division of integer polynomials; raises if a remainder is left."""
    den = list(den)
    while len(den) > 1 and den[-1] == 0:
        den.pop()
    rem = [Fraction(c) for c in num]
    quotient = [Fraction(0)] * max(len(num) - len(den) + 1, 1)
    for k in range(len(num) - len(den), -1, -1):
        c = rem[k + len(den) - 1] / den[-1]
        quotient[k] = c
        for j, d in enumerate(den):
            rem[k + j] -= c * d
    if any(rem):
        raise ArithmeticError("polynomial division is not exact")
    return [int(c) if c.denominator == 1 else c for c in quotient]


def flag_poincare(multiplicities):
    """Poincare polynomial of the partial flag manifold with the given block sizes.

    Gaussian multinomial ``[r]_q! / prod [m_i]_q!`` in ``q = t^2``.
    """
    mults = list(multiplicities)
    if not mults or any(not isinstance(m, int) or isinstance(m, bool) or m <= 0 for m in mults):
        raise BadMultiplicity(f"multiplicities must be positive integers, got {mults}")
    den = [1]
    for m in mults:
        den = _poly_mul(den, q_factorial(m))
    return PolySeries.polynomial(poly_divide_exact(q_factorial(sum(mults)), den))


def multinomial(multiplicities):
    return factorial(sum(multiplicities)) // prod(factorial(m) for m in multiplicities)


class Chamber(str, enum.Enum):
    D4 = "D4"
    D5 = "D5"
    EMPTY = "Empty"
    WALL = "Wall"


def chamber_report(mu):
    """Diffeomorphism type of ``M_5(mu)`` for SU(2), from the chamber walls 0, 1/5, 2/5."""
    mu = Fraction(mu)
    if mu < 0 or mu > Fraction(1, 2):
        raise OutOfAlcove(f"mu={mu} outside [0, 1/2]")
    if mu in (0, Fraction(1, 5), Fraction(2, 5)):
        return Chamber.WALL
    if mu < Fraction(1, 5):
        return Chamber.D4
    if mu < Fraction(2, 5):
        return Chamber.D5
    return Chamber.EMPTY


def unknot_hf(r):
    """Poincare polynomial of ``H(CP^{r-1})``, the unknot answer for label w1/2."""
    if r < 2:
        raise InvalidRank(f"rank {r} < 2")
    return flag_poincare([1, r - 1])
