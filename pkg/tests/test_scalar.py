from fractions import Fraction

import mpmath
import pytest
from gmpy2 import mpq
from hypothesis import given
from hypothesis import strategies as st

from logtr.errors import InvalidInput
from logtr.scalar import (
    LogCombination,
    Q,
    bernoulli,
    beta_coeff,
    polylog_nonpositive,
    polylog_numerator,
    qstr,
    rational_root,
    s_pair_coeff,
)

# sympy.bernoulli with the B_1 = -1/2 convention
BERNOULLI = [1, "-1/2", "1/6", 0, "-1/30", 0, "1/42", 0, "-1/30", 0, "5/66", 0, "-691/2730", 0, "7/6"]
# series coefficients of (u/2)/sinh(u/2), from sympy
BETA = [1, "-1/24", "7/5760", "-31/967680", "127/154828800", "-73/3503554560"]

fractions = st.fractions(min_value=-100, max_value=100, max_denominator=50)
positive = st.fractions(min_value=Fraction(1, 50), max_value=100, max_denominator=50)


def test_q_accepts_exact_inputs():
    assert Q("3/4") == mpq(3, 4)
    assert Q(" -7 ") == -7
    assert Q(Fraction(2, 6)) == mpq(1, 3)
    assert Q(1, 3) == mpq(1, 3)


@pytest.mark.parametrize("bad", [0.5, True, "1.5", "1/0", None])
def test_q_refuses_inexact_inputs(bad):
    with pytest.raises(InvalidInput):
        Q(bad)


def test_bernoulli_table():
    assert [bernoulli(n) for n in range(15)] == [Q(v) for v in BERNOULLI]


def test_beta_coefficients():
    assert [beta_coeff(k) for k in range(6)] == [Q(v) for v in BETA]


def test_pair_coefficient_at_equal_times():
    assert s_pair_coeff(0, 1, 1) == 1
    assert s_pair_coeff(1, 1, 1) == Q("-1/12")


@pytest.mark.parametrize(
    "m, x, expected",
    [(-1, "1/3", "3/4"), (-2, "1/3", "3/2"), (-3, "-2", "2/27"), (-5, "2/7", "97006/3125")],
)
def test_polylog_values(m, x, expected):
    assert polylog_nonpositive(m, x) == Q(expected)


def test_polylog_zero_order_and_pole():
    assert polylog_numerator(0) == ([0, 1], 1)
    with pytest.raises(InvalidInput):
        polylog_nonpositive(-2, 1)
    with pytest.raises(InvalidInput):
        polylog_numerator(1)


@given(st.integers(min_value=0, max_value=5), st.fractions(min_value=Fraction(-9, 10), max_value=Fraction(9, 10), max_denominator=10))
def test_polylog_matches_mpmath(m, x):
    exact = polylog_nonpositive(-m, x)
    with mpmath.workdps(40):
        ref = mpmath.polylog(-m, mpmath.mpf(x.numerator) / x.denominator)
        err = abs(mpmath.mpf(exact.numerator) / exact.denominator - ref)
        assert err <= mpmath.mpf(10) ** -30 * max(1, abs(ref))


def test_rational_root():
    assert rational_root("4/9", 2) == mpq(2, 3)
    assert rational_root(-8, 3) == -2
    assert rational_root(2, 2) is None
    assert rational_root(-4, 2) is None


@given(fractions)
def test_qstr_roundtrip(f):
    assert Q(qstr(Q(f))) == Q(f)


def test_log_combination_algebra():
    a = LogCombination(1, {2: 3})
    b = LogCombination.log(2, -3) + 2
    assert a + b == LogCombination(3)
    assert (a * 2).logs == ((mpq(2), mpq(6)),)
    assert LogCombination.log(1, 5).is_zero()
    assert str(LogCombination(Q("1/2"), {3: 1})) == "1/2 + 1*log(3)"
    with pytest.raises(InvalidInput):
        LogCombination.log(0)


def test_expand_primes():
    assert LogCombination.log(6).expand_primes() == LogCombination(0, {2: 1, 3: 1})
    assert LogCombination.log(Q("-3/4")).expand_primes() == LogCombination(0, {-1: 1, 3: 1, 2: -2})


@given(positive, positive)
def test_log_combination_numeric(x, y):
    c = LogCombination(Q(x), {Q(y): 2})
    with mpmath.workdps(30):
        ref = mpmath.mpf(x.numerator) / x.denominator + 2 * mpmath.log(mpmath.mpf(y.numerator) / y.denominator)
        assert abs(c.to_complex() - ref) < mpmath.mpf(10) ** -25


@given(fractions, fractions, fractions.filter(lambda f: f != 0))
def test_log_combination_add_commutes(r, c, arg):
    u = LogCombination(Q(r), {Q(arg): Q(c)})
    v = LogCombination.log(Q(arg) * 2 if arg != Fraction(1, 2) else 3, 1)
    assert u + v == v + u
    assert (u - u).is_zero()
