import pytest

from logtr.correlator import CorrelatorCache
from logtr.curve import analyze
from logtr.errors import CollisionOfSpecialPoints, InvalidInput
from logtr.identities import example_curve
from logtr.scalar import Q
from logtr.variation import (
    DeformationSpec,
    Target,
    check_variational,
    deform_curve,
    fd_derivative,
    variation_free_energy,
    variation_rhs_vital,
)

PTS1 = ((Q(7, 2),), (Q(-5, 3),))
PTS3 = ((Q(7, 2), Q(-5, 3), Q(11, 4)),)


@pytest.mark.parametrize("a", [[0, 1], [2, 5], ["-1/2", 3]])
def test_calibration_value(a):
    curve = analyze(example_curve("sw-half", a, [1, 1]))
    a1, a2 = Q(a[0]), Q(a[1])
    assert variation_free_energy(curve, DeformationSpec.vital_position(0), 2) == -1 / (120 * (a1 - a2) ** 3)


def test_calibration_against_finite_differences(ex1):
    fd = fd_derivative(ex1, DeformationSpec.vital_position(0), Target(2))
    assert abs(fd.value[0] - Q(1, 120).__float__()) < 1e-12


def test_vital_variation_of_bergman_is_zero(ex1):
    assert variation_rhs_vital(ex1, 0, 0, 2, CorrelatorCache(ex1)).is_zero()


CASES = [
    ("ex1", DeformationSpec.vital_position(1), Target(1, 1, PTS1)),
    ("ex1", DeformationSpec.vital_position(0), Target(3)),
    ("ex1", DeformationSpec.vital_position(0), Target(1)),
    ("ex1", DeformationSpec.irregular_time("oo", 2), Target(2)),
    ("ex1", DeformationSpec.irregular_time("oo", 2), Target(1)),
    ("ex1", DeformationSpec.monodromy_pair(5, -4), Target(2)),
    ("ex1", DeformationSpec.monodromy_pair(5, -4), Target(1)),
    ("airy", DeformationSpec.irregular_time("oo", 3), Target(0, 3, PTS3)),
    ("airy", DeformationSpec.irregular_time("oo", 3), Target(1, 1, PTS1)),
    ("airy", DeformationSpec.irregular_time("oo", 3), Target(2)),
    ("mixed", DeformationSpec.vital_position(0), Target(1, 1, PTS1)),
    ("mixed", DeformationSpec.vital_position(0), Target(0, 3, PTS3)),
    ("mixed", DeformationSpec.vital_position(0), Target(2)),
    ("ex2", DeformationSpec.vital_position(0), Target(2)),
]


@pytest.mark.parametrize("name, d, target", CASES, ids=[f"{c[0]}-{c[1].describe()}-{c[2].describe()}" for c in CASES])
def test_residue_side_matches_finite_differences(request, name, d, target):
    curve = request.getfixturevalue(name)
    reports = check_variational(curve, d, target)
    assert all(r.passed for r in reports), [r.to_text() for r in reports]


def test_deformation_validation(ex1):
    with pytest.raises(InvalidInput):
        DeformationSpec.irregular_time("oo", 0)
    with pytest.raises(InvalidInput):
        DeformationSpec.monodromy_pair(1, 1)
    with pytest.raises(InvalidInput):
        DeformationSpec("rotation")
    with pytest.raises(InvalidInput):
        deform_curve(ex1, DeformationSpec.vital_position(5), Q(1, 10))


def test_vital_move_into_another_point(ex1):
    with pytest.raises(CollisionOfSpecialPoints):
        deform_curve(ex1, DeformationSpec.vital_position(0), 1)


def test_zero_parameter_is_identity(ex1):
    assert deform_curve(ex1, DeformationSpec.irregular_time("oo", 1), 0) == ex1.spec


def test_bad_eps_schedule(ex1):
    with pytest.raises(InvalidInput):
        fd_derivative(ex1, DeformationSpec.vital_position(0), Target(2), [Q(1, 10)])
