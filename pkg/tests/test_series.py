from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from logtr.errors import InvalidValuation, NonSquareLeading, NotInvertible, OutOfRange, TagMismatch
from logtr.scalar import Q
from logtr.series import LaurentSeries

PREC = 12
coeff = st.fractions(min_value=-20, max_value=20, max_denominator=12)
polys = st.lists(coeff, min_size=1, max_size=6)
units = st.lists(coeff, min_size=0, max_size=5).map(lambda cs: [Fraction(1)] + cs)


def series(cs, prec=PREC, tag="t"):
    return LaurentSeries.from_poly([Q(c) for c in cs], prec, tag)


def test_geometric_inverse():
    one_minus_t = series([1, -1])
    inv = one_minus_t.inverse()
    assert [inv.coeff(k) for k in range(PREC)] == [1] * PREC
    assert (inv * one_minus_t).truncate(PREC).same_known(series([1]))


def test_coefficients_past_precision_are_unknown():
    s = series([1, 2, 3], prec=3)
    assert s.coeff(2) == 3
    with pytest.raises(OutOfRange):
        s.coeff(3)


def test_laurent_residue():
    s = LaurentSeries([2, 5, 7], val=-2, prec=4)
    assert s.residue() == 5
    assert s.min_degree == -2


def test_tags_do_not_mix():
    with pytest.raises(TagMismatch):
        series([1], tag="t") + series([1], tag="u")


def test_reversion():
    f = series([0, 1, 1])  # t + t^2
    g = f.revert()
    assert f.compose(g).same_known(series([0, 1], prec=g.prec))
    assert [g.coeff(k) for k in range(1, 6)] == [1, -1, 2, -5, 14]  # signed Catalan numbers
    with pytest.raises(NotInvertible):
        series([0, 0, 1]).revert()


def test_sqrt_even():
    s = series([0, 0, 4, 4])  # 4 t^2 (1 + t)
    r = s.sqrt_even()
    assert r.val == 1 and r.coeff(1) == 2
    assert (r * r).same_known(s.truncate(r.prec + 1))
    with pytest.raises(NonSquareLeading):
        series([0, 0, 2]).sqrt_even()
    with pytest.raises(NonSquareLeading):
        series([0, 1]).sqrt_even()


def test_exp_log_inverse():
    u = series([0, 1, Fraction(1, 3)])
    assert u.exp().log_unit().same_known(u)
    with pytest.raises(InvalidValuation):
        series([1, 1]).exp()


@given(polys, units)
def test_division_roundtrip(a, b):
    A, B = series(a), series(b)
    assert ((A / B) * B).same_known(A)


@given(polys, polys)
def test_product_commutes(a, b):
    assert (series(a) * series(b)).same_known(series(b) * series(a))


@given(polys, polys)
def test_leibniz_rule(a, b):
    A, B = series(a), series(b)
    lhs = (A * B).derivative()
    rhs = A.derivative() * B + A * B.derivative()
    assert lhs.same_known(rhs)


@given(units, st.fractions(min_value=-3, max_value=3, max_denominator=4))
def test_pow_unit_multiplies_exponents(b, e):
    B = series(b)
    assert (B.pow_unit(e) * B.pow_unit(1 - e)).same_known(B)


@given(polys)
def test_antiderivative_then_derivative(a):
    A = series(a)
    assert A.antiderivative().derivative().same_known(A)


def test_laurent_product_cancellation():
    # (t^-1 + 1)(t - t^2) = 1 - t^2
    a = LaurentSeries([1, 1], val=-1, prec=6)
    b = LaurentSeries([1, -1], val=1, prec=8)
    p = a * b
    assert [p.coeff(k) for k in range(4)] == [1, 0, -1, 0]
