from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from logtr.correlator import CorrelatorCache, compute_omega
from logtr.curve import analyze
from logtr.errors import InvalidInput, TauUnsupported
from logtr.identities import (
    check_dilaton,
    check_lemma31,
    check_residue_tricks,
    example_curve,
    free_energy,
    free_energy_f1,
    paper_example_oracles,
    strip_f1,
    strip_free_energy,
    strip_omega,
    strip_omega_value,
    sw_half_f1,
    sw_half_free_energy,
)
from logtr.scalar import LogCombination, Q
from logtr.series import LaurentSeries

CURVES = ["airy", "ex1", "ex2", "mixed"]


@pytest.mark.parametrize("name", CURVES)
def test_dilaton_both_forms(request, name):
    curve = request.getfixturevalue(name)
    cache = CorrelatorCache(curve)
    failed = []
    for h in range(3):
        for k in range(1, 5):
            if (h, k) != (0, 1) and 2 * h + k <= 5:
                failed += [r.to_text() for r in check_dilaton(curve, h, k, cache) if not r.passed]
    assert not failed


def test_dilaton_rejects_unstable():
    curve = analyze(example_curve("sw-half", [0], [1]))
    with pytest.raises(InvalidInput):
        check_dilaton(curve, 0, 1)


@pytest.mark.parametrize("name", ["ex1", "ex2", "mixed"])
def test_lemma31(request, name):
    curve = request.getfixturevalue(name)
    cache = CorrelatorCache(curve)
    reports = []
    for s in range(len(curve.vital)):
        for h in (1, 2):
            reports += check_lemma31(curve, h, s, None, cache)
            reports += check_lemma31(curve, h, s, LaurentSeries.from_poly([2, -1, 3], 40), cache)
    assert reports and all(r.passed for r in reports), [r.to_text() for r in reports if not r.passed]


def test_residue_tricks(mixed):
    for k in (1, 2, 3):
        reports = check_residue_tricks(mixed, 3, LaurentSeries.from_poly([1, 2, 3], 40), k)
        assert all(r.passed for r in reports)


# values from the free-energy formula expanded with sympy (frozen)
@pytest.mark.parametrize(
    "a, y, expected",
    [
        ([0, 1], [1, 1], ["1/240", "-1/1008", "1/1440"]),
        ([0, 1, 3], [2, 3, -1], ["-383/622080", "1555/125411328", "-19721/25798901760"]),
    ],
)
def test_sw_half_free_energies(a, y, expected):
    curve = analyze(example_curve("sw-half", a, y))
    cache = CorrelatorCache(curve)
    for h, value in zip((2, 3, 4), expected):
        assert free_energy(curve, h, cache) == Q(value)
        assert sw_half_free_energy(a, y, h) == Q(value)


@pytest.mark.parametrize(
    "a, y, expected",
    [([2, 3], [1, 2], ["59/2880", "-997369/46448640"]), ([1, 2], [1, 1], ["23/2880", "-3121/725760"])],
)
def test_strip_free_energies(a, y, expected):
    curve = analyze(example_curve("strip", a, y))
    for h, value in zip((2, 3), expected):
        assert free_energy(curve, h) == Q(value)
        assert strip_free_energy(a, y, h) == Q(value)


def test_free_energy_basepoint_independence(ex1_generic):
    for o in ("7/2", "-5"):
        assert free_energy(ex1_generic, 2, basepoint=o) == free_energy(ex1_generic, 2)


def test_f1_needs_tau_with_ramification(airy, mixed):
    with pytest.raises(TauUnsupported):
        free_energy_f1(mixed)
    assert free_energy_f1(airy, allow_missing_tau=True) == 0


def test_f1_convention_on_sw_half():
    # the engine's F_1 carries the vital limit with the sign that the
    # variational formulas require; the closed form has the opposite sign
    curve = analyze(example_curve("sw-half", [0], [1], 24))
    assert free_energy_f1(curve) == 1
    assert sw_half_f1([0], [1], 24) == -1


def test_strip_f1_difference_is_constant_up_to_sign():
    diffs = []
    for a in ([1, 2], [3, 5], [2, 7]):
        curve = analyze(example_curve("strip", a, ["1/2", 3]))
        diffs.append(((-free_energy_f1(curve)) - strip_f1(a, ["1/2", 3])).expand_primes())
    assert diffs[0] == diffs[1] == diffs[2] == LogCombination(0, {-1: Q(1, 12)})


@pytest.mark.parametrize("h", [1, 2, 3])
def test_strip_omega_convention(ex2, h):
    engine = compute_omega(ex2, h, 1)
    closed = strip_omega([2, 3], [1, 2], h)
    assert (engine + closed).is_zero()
    z = Q(5, 7)
    assert closed.evaluate_at([z]) == strip_omega_value([2, 3], [1, 2], h, z)


def test_oracle_registry():
    assert paper_example_oracles("sw-half", {"h": 2, "a": [0, 1]}) == Q(1, 240)
    assert paper_example_oracles("SW-half", {"h": 1, "a": [0], "lambda": 24}) == -1
    with pytest.raises(InvalidInput):
        paper_example_oracles("conifold", {"h": 2, "a": [0, 1]})


distinct_pair = st.lists(st.integers(min_value=-6, max_value=6), min_size=2, max_size=2, unique=True)
times = st.lists(
    st.fractions(min_value=-4, max_value=4, max_denominator=3).filter(lambda f: f != 0), min_size=2, max_size=2
)


@given(distinct_pair, times)
def test_sw_half_free_energy_property(a, y):
    curve = analyze(example_curve("sw-half", a, y))
    assert free_energy(curve, 2) == sw_half_free_energy(a, y, 2)


@given(st.integers(min_value=1, max_value=5), st.integers(min_value=6, max_value=12), times)
def test_strip_free_energy_property(a1, a2, y):
    a = [Fraction(a1), Fraction(a2)]
    curve = analyze(example_curve("strip", a, y))
    assert free_energy(curve, 2) == strip_free_energy(a, y, 2)
