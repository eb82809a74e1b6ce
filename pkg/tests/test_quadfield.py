import math
from fractions import Fraction

import pytest

from kokoflex.errors import InconsistentInput
from kokoflex.quadfield import Surd, extract_square, fraction_sqrt, surd_sqrt


def test_extract_square():
    assert extract_square(1) == (1, 1)
    assert extract_square(14) == (1, 14)
    assert extract_square(50) == (5, 2)
    assert extract_square(144) == (12, 1)
    assert extract_square(0) == (0, 1)


def test_fraction_sqrt():
    coeff, rad = fraction_sqrt(Fraction(1, 14))
    assert coeff == Fraction(1, 14) and rad == 14
    coeff, rad = fraction_sqrt(Fraction(9, 4))
    assert coeff == Fraction(3, 2) and rad == 1
    with pytest.raises(InconsistentInput):
        fraction_sqrt(Fraction(-1, 2))


def test_basic_arithmetic():
    x = Surd(1, 1, 2)  # 1 + sqrt(2)
    y = Surd(1, -1, 2)  # 1 - sqrt(2)
    assert (x * y) == -1
    assert (x + y) == 2
    assert (x - y) == Surd(0, 2, 2)
    assert float(x) == pytest.approx(1.0 + math.sqrt(2.0))


def test_division_and_inverse():
    x = Surd(3, 2, 5)
    assert (x / x) == 1
    assert (x * x.inverse()) == 1
    assert (1 / x) == x.inverse()
    assert (x / 2) == Surd(Fraction(3, 2), 1, 5)


def test_power():
    phi = Surd(Fraction(1, 2), Fraction(1, 2), 5)  # golden ratio
    assert phi**2 == phi + 1
    assert phi**0 == 1


def test_exact_comparisons():
    r2 = Surd(0, 1, 2)
    # 99/70 is a convergent of sqrt(2) from above, 1393/985 from below
    assert r2 < Fraction(99, 70)
    assert r2 > Fraction(1393, 985)
    assert abs(Surd(1, -1, 2)) == Surd(-1, 1, 2)
    assert Surd(-3).sign() == -1
    assert Surd(0).sign() == 0


def test_rational_collapse():
    # b = 0 collapses the radicand so values with different history compare
    a = Surd(2, 0, 7)
    b = Surd(2, 0, 3)
    assert a == b
    assert a + Surd(0, 1, 11) == Surd(2, 1, 11)


def test_mixed_radicands_rejected():
    with pytest.raises(InconsistentInput):
        Surd(1, 1, 2) + Surd(1, 1, 3)


def test_int_interop():
    x = Surd(0, 1, 14)
    assert 2 * x == Surd(0, 2, 14)
    assert (x + 3) - 3 == x
    assert 14 * x.inverse() == x  # 14 / sqrt(14) == sqrt(14)


def test_surd_sqrt():
    s = surd_sqrt(Fraction(1, 14))
    assert s == Surd(0, Fraction(1, 14), 14)
    assert (s * s) == Fraction(1, 14)
    assert surd_sqrt(Fraction(9, 16)) == Fraction(3, 4)


def test_flagship_field_identity():
    # the motion parameter value sqrt(14)/14 squares to 1/14
    t = Surd(0, Fraction(1, 14), 14)
    assert 14 * t * t == 1
    assert (2 - 4 * t * t) == Fraction(12, 7)
