import numpy as np
import pytest

from algebra import SpaceParams, p_unit
from connection import (
    connection_table,
    metric_compatibility_residual,
    nabla,
    torsion_residual,
    u_closed_form_array,
    u_symmetry_residual,
    u_tensor_array,
    u_tensor_closed_form,
    u_tensor_solve,
    u_trace_vector,
)
from structures import MetricParams

SPACES = [SpaceParams(0, 1), SpaceParams(1, 0), SpaceParams(1, 1), SpaceParams(2, 1), SpaceParams(1, 3)]
METRICS = [MetricParams(0.0, 1.0), MetricParams(1.0, 1.0), MetricParams(-1.5, 0.4), MetricParams(0.6, 3.0)]


@pytest.mark.parametrize("space", SPACES)
@pytest.mark.parametrize("m", METRICS)
def test_u_solve_matches_closed_form(space, m):
    solved = u_tensor_array(space, m)
    closed = u_closed_form_array(space, m)
    assert np.max(np.abs(solved - closed)) < 1e-10


def test_u_values():
    space = SpaceParams(1, 1)
    x1, y11, y21 = (p_unit(space, label) for label in ("X1", "Y1_1", "Y2_1"))

    m = MetricParams(0.0, 0.5)
    expected = (2 - 0.5) / (2 * 0.5) * p_unit(space, "Y1_2")
    assert u_tensor_solve(space, m, x1, y11) == pytest.approx(expected, abs=1e-12)

    m = MetricParams(1.0, 1.0)
    assert u_tensor_solve(space, m, x1, y21) == pytest.approx(-p_unit(space, "Y2_2"), abs=1e-12)
    assert u_tensor_closed_form(space, m, x1, y21) == pytest.approx(-p_unit(space, "Y2_2"), abs=1e-12)


def test_u_vanishes_on_y_pairs():
    space = SpaceParams(2, 2)
    m = MetricParams(0.3, 2.0)
    y = p_unit(space, "Y1_1")
    z = p_unit(space, "Y2_3")
    assert np.max(np.abs(u_tensor_solve(space, m, y, z))) < 1e-12
    assert np.max(np.abs(u_tensor_solve(space, m, p_unit(space, "X1"), p_unit(space, "X2")))) < 1e-12


@pytest.mark.parametrize("space", SPACES)
@pytest.mark.parametrize("m", METRICS)
def test_levi_civita_properties(space, m):
    table = connection_table(space, m)
    assert torsion_residual(table) < 1e-10
    assert metric_compatibility_residual(table) < 1e-10
    assert u_symmetry_residual(table) < 1e-12


@pytest.mark.parametrize("space", SPACES)
@pytest.mark.parametrize("m", METRICS)
def test_u_trace_vanishes(space, m):
    assert np.max(np.abs(u_trace_vector(space, m))) < 1e-10


def test_nabla_on_y_pair():
    space = SpaceParams(1, 1)
    m = MetricParams(0.0, 1.0)
    result = nabla(space, m, p_unit(space, "Y1_1"), p_unit(space, "Y1_2"))
    assert result == pytest.approx(-p_unit(space, "X1"), abs=1e-12)


def test_nabla_is_bilinear():
    space = SpaceParams(1, 2)
    m = MetricParams(0.8, 1.3)
    rng = np.random.default_rng(2)
    x, y, z = rng.standard_normal((3, space.d))
    lhs = nabla(space, m, 2.0 * x + z, y)
    rhs = 2.0 * nabla(space, m, x, y) + nabla(space, m, z, y)
    assert np.max(np.abs(lhs - rhs)) < 1e-12


def test_connection_table_is_cached():
    space = SpaceParams(1, 1)
    assert connection_table(space, MetricParams(0.5, 2.0)) is connection_table(space, MetricParams(0.5, 2.0))
