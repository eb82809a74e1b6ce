"""Exact arithmetic in real quadratic fields Q(sqrt(d)).

The bundled flagship design lives in Q(sqrt(14)), and its matching
certificate is computed here so the minors vanish identically instead
of to rounding. A Surd stores a + b*sqrt(d) with Fraction coefficients
and supports enough of the number protocol that the polynomial code
runs unchanged on floats or Surds.
"""

from __future__ import annotations

import math
from fractions import Fraction

from .errors import InconsistentInput

_RationalTypes = (int, Fraction)


def extract_square(n: int):
    """Write n = s*s*m with m squarefree; returns (s, m). Requires n >= 0."""
    if n < 0:
        raise InconsistentInput("negative radicand")
    if n == 0:
        return 0, 1
    s, m = 1, n
    i = 2
    while i * i <= m:
        while m % (i * i) == 0:
            m //= i * i
            s *= i
        i += 1
    return s, m


def fraction_sqrt(x):
    """Square root of a nonnegative Fraction as (coefficient, radicand).

    sqrt(x) = coefficient * sqrt(radicand) with radicand squarefree;
    radicand == 1 means the root is rational.
    """
    x = Fraction(x)
    if x < 0:
        raise InconsistentInput("negative radicand")
    num = x.numerator * x.denominator
    s, m = extract_square(num)
    return Fraction(s, x.denominator), m


class Surd:
    """Exact number a + b*sqrt(d) with a, b rational and d squarefree."""

    __slots__ = ("a", "b", "d")

    def __init__(self, a, b=0, d: int = 1):
        if d < 1:
            raise InconsistentInput("radicand must be a positive integer")
        a, b = Fraction(a), Fraction(b)
        if d == 1:
            a, b = a + b, Fraction(0)
        if b == 0:
            d = 1
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "d", d)

    def __setattr__(self, name, value):
        raise AttributeError("Surd is immutable")

    def _coerce(self, other):
        if isinstance(other, Surd):
            if other.d != self.d and other.b != 0 and self.b != 0:
                raise InconsistentInput(
                    f"mixed radicands sqrt({self.d}) and sqrt({other.d})"
                )
            return other
        if isinstance(other, _RationalTypes):
            return Surd(other)
        return None

    def _join(self, other):
        # common radicand once at most one side is purely rational
        return self.d if self.b != 0 else other.d

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return Surd(self.a + o.a, self.b + o.b, self._join(o))

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return Surd(self.a - o.a, self.b - o.b, self._join(o))

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        d = self._join(o)
        return Surd(self.a * o.a + self.b * o.b * d, self.a * o.b + self.b * o.a, d)

    __rmul__ = __mul__

    def inverse(self) -> "Surd":
        n = self.a * self.a - self.b * self.b * self.d
        if n == 0:
            raise ZeroDivisionError("Surd division by zero")
        return Surd(self.a / n, -self.b / n, self.d)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if o.b == 0:
            if o.a == 0:
                raise ZeroDivisionError("Surd division by zero")
            return Surd(self.a / o.a, self.b / o.a, self.d)
        return self * Surd(o.a, o.b, self._join(o)).inverse()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o / self

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            return NotImplemented
        out = Surd(1, 0, self.d)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __neg__(self):
        return Surd(-self.a, -self.b, self.d)

    def __abs__(self):
        return -self if self.sign() < 0 else self

    def sign(self) -> int:
        if self.b == 0:
            return (self.a > 0) - (self.a < 0)
        if self.a == 0:
            return 1 if self.b > 0 else -1
        sa = 1 if self.a > 0 else -1
        sb = 1 if self.b > 0 else -1
        if sa == sb:
            return sa
        # a and b*sqrt(d) pull opposite ways; compare magnitudes exactly
        diff = self.a * self.a - self.b * self.b * self.d
        if diff == 0:
            return 0
        return sa if diff > 0 else -sa

    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0

    def conjugate(self) -> "Surd":
        return Surd(self.a, -self.b, self.d)

    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self.a == o.a and self.b == o.b

    def __hash__(self):
        if self.b == 0:
            return hash(self.a)
        return hash((self.a, self.b, self.d))

    def _cmp(self, other, op):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return op((self - o).sign(), 0)

    def __lt__(self, other):
        return self._cmp(other, lambda s, z: s < z)

    def __le__(self, other):
        return self._cmp(other, lambda s, z: s <= z)

    def __gt__(self, other):
        return self._cmp(other, lambda s, z: s > z)

    def __ge__(self, other):
        return self._cmp(other, lambda s, z: s >= z)

    def __float__(self):
        return float(self.a) + float(self.b) * math.sqrt(self.d)

    def __repr__(self):
        if self.b == 0:
            return f"Surd({self.a})"
        return f"Surd({self.a} + {self.b}*sqrt({self.d}))"


def surd_sqrt(x) -> Surd:
    """Exact square root of a nonnegative rational, as a Surd."""
    coeff, rad = fraction_sqrt(Fraction(x))
    if rad == 1:
        return Surd(coeff)
    return Surd(0, coeff, rad)
