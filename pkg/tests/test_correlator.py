import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from logtr.correlator import (
    CorrelatorCache,
    PoleSum,
    check_lle,
    check_lpp,
    check_qle,
    check_residue_free,
    check_truncation_stability,
    check_vital_loop,
    compute_omega,
    vital_term,
)
from logtr.curve import CurveSpec, analyze
from logtr.errors import InvalidInput, Unsupported
from logtr.identities import sw_half_omega
from logtr.scalar import Q

# brute-force recursion on x = z^2, y = z with sympy residues (frozen)
AIRY_ORACLE = {
    (0, 3): lambda a, b, c: Q(-1, 2) / (a * b * c) ** 2,
    (1, 1): lambda a: Q(-1, 16) / a**4,
    (0, 4): lambda a, b, c, d: Q(3, 4) * (a * a * b * b * c * c + a * a * b * b * d * d + a * a * c * c * d * d + b * b * c * c * d * d)
    / (a * b * c * d) ** 4,
    (1, 2): lambda a, b: (5 * a**4 + 3 * a * a * b * b + 5 * b**4) / (32 * a**6 * b**6),
    (2, 1): lambda a: Q(-105, 1024) / a**10,
}
POINTS = [Q(1, 2), Q(3), Q(-2, 5), Q(7, 3)]


@pytest.mark.parametrize("hn", sorted(AIRY_ORACLE))
def test_airy_against_brute_force(airy, hn):
    h, n = hn
    ps = compute_omega(airy, h, n, CorrelatorCache(airy))
    pts = POINTS[:n]
    assert ps.evaluate_at(pts) == AIRY_ORACLE[hn](*pts)


def test_airy_omega_03_text(airy):
    ps = compute_omega(airy, 0, 3)
    assert ps.to_text() == "-1/2 * dz1/(z1-0)^2 * dz2/(z2-0)^2 * dz3/(z3-0)^2"


@pytest.mark.parametrize("h", [1, 2, 3])
def test_sw_half_closed_form(ex1_generic, h):
    assert compute_omega(ex1_generic, h, 1) == sw_half_omega([0, 1, 3], [2, 3, -1], h)


def test_sw_half_spot_values(ex1):
    assert compute_omega(ex1, 1, 1).to_text() == "1/24 * dz/(z-0)^2 + 1/24 * dz/(z-1)^2"
    assert compute_omega(ex1, 2, 1).to_text() == "-7/960 * dz/(z-0)^4 - 7/960 * dz/(z-1)^4"


def test_empty_curve_gives_zero():
    curve = analyze(CurveSpec.build("z", "0"))
    assert compute_omega(curve, 2, 1).to_text() == "0"
    assert compute_omega(curve, 0, 3).is_zero()


def test_limits():
    curve = analyze(CurveSpec.build("z**2", "z"))
    with pytest.raises(InvalidInput):
        compute_omega(curve, 0, 2)
    with pytest.raises(Unsupported):
        compute_omega(curve, 7, 1)


@pytest.mark.parametrize("route", ["residue", "derivative"])
def test_vital_term_routes(ex1_generic, route):
    for h in (1, 2, 3):
        for s in range(3):
            assert vital_term(ex1_generic, h, s, route) == vital_term(ex1_generic, h, s, "residue")


CURVES = ["airy", "ex1", "ex2", "mixed"]
GRID = [(0, 3), (0, 4), (1, 1), (1, 2), (2, 1)]


@pytest.mark.parametrize("name", CURVES)
def test_property_suite(request, name):
    curve = request.getfixturevalue(name)
    cache = CorrelatorCache(curve)
    reports = []
    for h, n in GRID:
        reports += [check_residue_free(curve, h, n, cache), check_lpp(curve, h, n, cache), check_truncation_stability(curve, h, n, cache)]
        if curve.ramification:
            if n >= 2:
                reports.append(check_lle(curve, h, n - 1, cache))
            if 2 * h + n - 3 > 0:
                reports.append(check_qle(curve, h, n - 1, cache))
    if curve.ramification:
        reports.append(check_lle(curve, 0, 1, cache))
    for h in (1, 2):
        if curve.vital:
            reports.append(check_vital_loop(curve, h, cache))
    failed = [r.to_text() for r in reports if not r.passed]
    assert not failed


def test_corrupted_cache_is_detected(airy):
    cache = CorrelatorCache(airy)
    compute_omega(airy, 0, 3, cache)
    cache.corrupt(0, 3, PoleSum(3, {((Q(5), 2),) * 3: Q(1)}))
    assert not check_residue_free(airy, 0, 3, cache).passed
    report = check_truncation_stability(airy, 0, 3, cache)
    assert not report.passed and report.witness


def test_cache_first_writer_wins(airy):
    cache = CorrelatorCache(airy)
    first = cache.insert(1, 1, PoleSum(1, {((Q(0), 4),): Q(1)}))
    second = cache.insert(1, 1, PoleSum(1, {((Q(0), 4),): Q(2)}))
    assert first == second == cache.get(1, 1)


# --------------------------------------------------------------------------
# PoleSum algebra and serialization

poles = st.tuples(st.fractions(min_value=-4, max_value=4, max_denominator=3), st.integers(min_value=2, max_value=5))
coeffs = st.fractions(min_value=-10, max_value=10, max_denominator=7).filter(lambda f: f != 0)


def pole_sums(arity):
    keys = st.tuples(*([poles] * arity)).map(lambda k: tuple((Q(p), m) for p, m in k))
    return st.dictionaries(keys, coeffs.map(Q), max_size=4).map(lambda t: PoleSum(arity, t))


@given(st.integers(min_value=1, max_value=3).flatmap(pole_sums))
def test_json_roundtrip(ps):
    assert PoleSum.from_json(ps.to_json()) == ps


@given(pole_sums(2), pole_sums(2))
def test_addition(a, b):
    assert a + b == b + a
    assert (a - a).is_zero()
    assert (a + b) - b == a


@given(pole_sums(3), st.permutations([0, 1, 2]))
def test_permutation_and_symmetrization(ps, perm):
    sym = PoleSum.zero(3)
    for p in itertools.permutations(range(3)):
        sym = sym + ps.permuted(p)
    assert sym.is_symmetric()
    assert sym.permuted(tuple(perm)) == sym


@given(pole_sums(1), st.fractions(min_value=5, max_value=9, max_denominator=4))
def test_evaluation_is_linear(ps, z):
    assert (ps.scale(3) + ps).evaluate_at([Q(z)]) == 4 * ps.evaluate_at([Q(z)])


@given(st.permutations([0, 1, 2, 3]))
def test_airy_omega_04_symmetric(airy, perm):
    ps = compute_omega(airy, 0, 4)
    pts = [POINTS[i] for i in perm]
    assert ps.evaluate_at(pts) == ps.evaluate_at(POINTS)


def test_residue_free_detection():
    assert PoleSum(1, {((Q(0), 2),): Q(1)}).is_residue_free()
    assert not PoleSum(1, {((Q(0), 1),): Q(1)}).is_residue_free()


def test_text_and_latex_formats():
    ps = PoleSum(1, {((Q(-1), 2),): Q(1, 3)})
    assert ps.to_text() == "1/3 * dz/(z+1)^2"
    assert "frac" in ps.to_latex()
