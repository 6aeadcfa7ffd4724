import pytest
from hypothesis import given
from hypothesis import strategies as st

from logtr.curve import (
    INF,
    CurveSpec,
    LogTerm,
    RationalFunction,
    admissibility_report,
    analyze,
    bergman_form,
    decomposition_roundtrip,
    extract_times,
    local_involution,
    singular_points,
)
from logtr.errors import (
    DySingularAtRamification,
    InvalidInput,
    IrrationalRamification,
    NonSimpleRamification,
    RamificationMismatch,
    SharedZeroLoci,
)
from logtr.identities import example_curve
from logtr.scalar import Q
from logtr.series import LaurentSeries

from conftest import airy_spec, mixed_spec


def kinds(spec):
    return [type(e) for e in admissibility_report(spec)[1]]


def test_airy_is_admissible(airy):
    assert kinds(airy_spec()) == []
    assert [r.location for r in airy.ramification] == [0]
    assert airy.vital == ()


@pytest.mark.parametrize(
    "spec, error",
    [
        (CurveSpec.build("z**3", "z"), NonSimpleRamification),
        (CurveSpec.build("z**3/3 - 2*z", "z"), IrrationalRamification),
        (CurveSpec.build("z**2", "1/z"), DySingularAtRamification),
        (CurveSpec.build("z**2", "z**2"), SharedZeroLoci),
        (CurveSpec.build("z**2", "z", declared_ramification=(1,)), RamificationMismatch),
    ],
)
def test_inadmissible_curves(spec, error):
    assert error in kinds(spec)


def test_duplicate_log_points_rejected():
    with pytest.raises(InvalidInput):
        CurveSpec.build("z", "0", y_logs=[(0, 1), (0, 2)])


def test_log_term_validation():
    with pytest.raises(InvalidInput):
        LogTerm(1, 0)
    with pytest.raises(InvalidInput):
        LogTerm(0, 1, "1-z/b")
    assert LogTerm(2, 3, "1-z/b").constant_shift().logs == ((Q(-2), Q(-3)),)


def test_vital_points_of_examples(ex1_generic, ex2):
    assert [(v.location, v.log_time) for v in ex1_generic.vital] == [(0, 2), (1, 3), (3, -1)]
    assert [v.location for v in ex2.vital] == [2, 3]
    assert ex2.ramification == ()


def test_mixed_curve(mixed):
    assert [r.location for r in mixed.ramification] == [0]
    assert [v.location for v in mixed.vital] == [3]
    assert mixed.vital[0].x_prime_at_a == 6


@pytest.mark.parametrize("p", [0, "-2/3"])
def test_local_involution_preserves_x(p):
    curve = analyze(CurveSpec.build("z**2 + z**3", "z"))
    N = 8
    sigma = local_involution(curve, p, N)
    p = Q(p)
    here = LaurentSeries.from_poly([p, 1], N)
    x = lambda s: s * s + s * s * s
    assert x(sigma).same_known(x(here).truncate(sigma.prec))
    assert sigma.coeff(0) == p and sigma.coeff(1) == -1


def test_bergman_forms_at_infinity(airy):
    assert bergman_form(airy, INF, 1).to_sympy() == -1
    assert str(bergman_form(airy, INF, 3).to_sympy()) == "-3*z**2"


DECOMPOSITION_CURVES = [
    airy_spec(),
    mixed_spec(),
    CurveSpec.build("z + 1/z", "z**2 + 1/(z - 2)", y_logs=[(3, 1)]),
    CurveSpec.build("z**2 + z**3", "z - 1/(z + 5)"),
    example_curve("sw-half", [0, 1, 3], [2, 3, -1], 5),
]


@pytest.mark.parametrize("spec", DECOMPOSITION_CURVES, ids=range(len(DECOMPOSITION_CURVES)))
def test_decomposition_roundtrip(spec):
    report = decomposition_roundtrip(analyze(spec))
    assert report.passed, report.difference
    assert report.monodromy_sum == 0


def test_times_of_a_pole_curve():
    curve = analyze(CurveSpec.build("z + 1/z", "z**2 + 1/(z - 2)", y_logs=[(3, 1)]))
    times = {str(t.point): t for t in (extract_times(curve, a) for a in singular_points(curve))}
    assert times["oo"].irregular == (-2, 0, Q(1, 3))
    assert times["oo"].monodromy == -1
    assert times["0"].irregular == (Q(-1, 2),)


@given(
    st.lists(st.fractions(min_value=-9, max_value=9, max_denominator=5), min_size=1, max_size=4),
    st.fractions(min_value=-5, max_value=5, max_denominator=5),
)
def test_decomposition_roundtrip_random_polynomial_y(coeffs, shift):
    y = RationalFunction.from_coeffs([Q(c) for c in coeffs])
    spec = CurveSpec(RationalFunction.from_coeffs([Q(shift), 0, 1]), y)
    items, errors = admissibility_report(spec)
    if errors:
        return
    assert decomposition_roundtrip(analyze(spec)).passed
