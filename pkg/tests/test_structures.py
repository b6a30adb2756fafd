import math

import numpy as np
import pytest

from algebra import ParameterError, SpaceParams, p_unit
from structures import (
    MetricParams,
    MetricParamsError,
    associated_metric,
    complex_structure,
    faulty_structure,
    frame_matrix,
    hermitian_metric_residual,
    kahler_defect,
    metric_table,
    nijenhuis_p,
    nijenhuis_residual,
    omega,
    omega_differential,
    orthonormal_frame,
    positivity_and_compatibility_check,
)

SPACES = [SpaceParams(0, 1), SpaceParams(1, 0), SpaceParams(1, 1), SpaceParams(2, 1), SpaceParams(1, 3)]
METRICS = [MetricParams(0.0, 1.0), MetricParams(1.0, 1.0), MetricParams(-2.5, 0.3), MetricParams(0.7, 4.0)]


@pytest.mark.parametrize("a,c", [(0.0, 0.0), (1.0, -1.0), (float("nan"), 1.0), (0.0, float("inf")), ("x", 1.0)])
def test_metric_params_rejects_invalid(a, c):
    with pytest.raises(MetricParamsError):
        MetricParams(a, c)


def test_metric_params_error_is_parameter_error():
    assert issubclass(MetricParamsError, ParameterError)


@pytest.mark.parametrize("space", SPACES)
def test_omega_is_nondegenerate(space):
    form = omega(space)
    assert form.rank() == space.d
    assert np.array_equal(form.skew, -form.skew.T)
    assert form(p_unit(space, "X1"), p_unit(space, "X2")) == 1.0


@pytest.mark.parametrize("space", SPACES)
@pytest.mark.parametrize("m", METRICS)
def test_complex_structure_squares_to_minus_identity(space, m):
    assert complex_structure(space, m).square_residual() < 1e-12


def test_complex_structure_on_x():
    space = SpaceParams(1, 1)
    mat = complex_structure(space, MetricParams(2.0, 0.5)).mat
    ix1 = mat @ p_unit(space, "X1")
    assert ix1[0] == pytest.approx(4.0)
    assert ix1[3] == pytest.approx(2.0)
    assert mat @ p_unit(space, "Y1_1") == pytest.approx(p_unit(space, "Y1_2"))


@pytest.mark.parametrize("space", SPACES)
@pytest.mark.parametrize("m", METRICS)
def test_positive_association(space, m):
    report = positivity_and_compatibility_check(space, m)
    assert report.compatible
    assert report.positive
    assert report.min_eigenvalue > 0


@pytest.mark.parametrize("space", SPACES)
def test_faulty_structure_is_rejected(space):
    m = MetricParams(0.3, 1.2)
    faulty = faulty_structure(space, m)
    report = positivity_and_compatibility_check(space, m, faulty)

    assert faulty.square_residual() < 1e-12
    assert report.compatible
    assert not report.positive
    assert report.min_eigenvalue == pytest.approx(-1.0)


@pytest.mark.parametrize("space", SPACES)
@pytest.mark.parametrize("m", METRICS)
def test_associated_metric_matches_table(space, m):
    derived = associated_metric(space, m)
    explicit = metric_table(space, m)
    assert np.max(np.abs(derived.sym - explicit.sym)) < 1e-12
    assert derived.symmetry_residual() < 1e-12
    assert derived.provenance == m


def test_metric_table_entries():
    space = SpaceParams(1, 1)
    g = metric_table(space, MetricParams(1.0, 2.0))
    x1, x2 = p_unit(space, "X1"), p_unit(space, "X2")
    assert g(x1, x1) == pytest.approx(0.5)
    assert g(x2, x2) == pytest.approx(2.5)
    assert g(x1, x2) == pytest.approx(-0.5)
    assert g(p_unit(space, "Y1_2"), p_unit(space, "Y1_2")) == 1.0


@pytest.mark.parametrize("space", SPACES)
@pytest.mark.parametrize("m", METRICS)
def test_metric_is_hermitian(space, m):
    assert hermitian_metric_residual(space, m) < 1e-10


@pytest.mark.parametrize("m", METRICS)
def test_frame_is_orthonormal(m):
    space = SpaceParams(2, 1)
    frame = frame_matrix(space, m)
    gram = frame.T @ metric_table(space, m).sym @ frame
    assert np.max(np.abs(gram - np.eye(space.d))) < 1e-12


def test_orthonormal_frame_elements():
    space = SpaceParams(1, 1)
    m = MetricParams(1.0, 4.0)
    frame = orthonormal_frame(space, m)
    assert len(frame) == space.d
    assert frame[0].p_coeffs[0] == pytest.approx(2.0)
    assert frame[3].p_coeffs[0] == pytest.approx(0.5)
    assert frame[3].p_coeffs[3] == pytest.approx(0.5)


@pytest.mark.parametrize("space", SPACES)
@pytest.mark.parametrize("m", METRICS)
def test_structure_is_integrable(space, m):
    assert nijenhuis_residual(space, m) < 1e-10


def test_nijenhuis_pointwise():
    space = SpaceParams(1, 1)
    m = MetricParams(0.4, 1.7)
    rng = np.random.default_rng(5)
    for _ in range(20):
        a, b = rng.standard_normal((2, space.d))
        assert np.max(np.abs(nijenhuis_p(space, m, a, b))) < 1e-10


def test_omega_differential_value():
    space = SpaceParams(1, 1)
    value = omega_differential(space, p_unit(space, "Y1_1"), p_unit(space, "Y1_2"), p_unit(space, "X2"))
    assert value == pytest.approx(2.0)


@pytest.mark.parametrize("space", SPACES)
def test_metric_is_never_kahler(space):
    assert kahler_defect(space) > 1.0


def test_x_components_of_frame_scale_with_c():
    space = SpaceParams(1, 1)
    frame = frame_matrix(space, MetricParams(0.0, 9.0))
    assert frame[0, 0] == pytest.approx(3.0)
    assert frame[3, 3] == pytest.approx(1.0 / 3.0)
    assert math.isclose(frame[0, 3], 0.0)
