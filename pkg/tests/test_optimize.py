import math

import numpy as np
import pytest

from algebra import ParameterError
from config import AscentConfig
from optimize import (
    AscentNotConvergedError,
    classify_critical_point,
    classify_hessian,
    find_critical_point,
    finite_difference_gradient,
    finite_difference_hessian,
    gradient_ascent,
    hermitian_ricci_at,
    hermitian_ricci_report,
    hermitian_ricci_scan,
    maximal_value,
    printed_partials,
    scalar_functional,
    scalar_gradient,
    scan_grid,
)
from structures import MetricParamsError
from utils import relative_error

GRID = [(n, p) for n in range(1, 5) for p in range(1, 5)]


def test_scalar_functional_values():
    assert scalar_functional(1, 1, 0.0, 1.0) == pytest.approx(12.0)
    assert scalar_functional(4, 1, 0.0, 2.0) == pytest.approx(80.0)


def test_scalar_functional_rejects_bad_metric():
    with pytest.raises(MetricParamsError):
        scalar_functional(1, 1, 0.0, 0.0)


def test_scalar_gradient_values():
    da, _ = scalar_gradient(1, 1, 1.0, 1.0)
    _, dc = scalar_gradient(1, 1, 0.0, 2.0)
    assert da == pytest.approx(-4.0)
    assert dc == pytest.approx(-1.5)


@pytest.mark.parametrize("a,c", [(0.0, 1.0), (1.3, 0.4), (-2.0, 3.5)])
def test_printed_partials_are_quarter_of_gradient(a, c):
    analytic = np.array(scalar_gradient(2, 3, a, c))
    printed = np.array(printed_partials(2, 3, a, c))
    assert analytic == pytest.approx(4.0 * printed)


@pytest.mark.parametrize("n,p", [(1, 1), (0, 2), (3, 1)])
def test_gradient_matches_finite_differences(n, p):
    rng = np.random.default_rng(n + 10 * p)
    for a, c in zip(rng.uniform(-3, 3, 20), rng.uniform(0.1, 5, 20)):
        numeric = finite_difference_gradient(lambda x: scalar_functional(n, p, x[0], x[1]), [a, c])
        analytic = scalar_gradient(n, p, a, c)
        for got, want in zip(numeric, analytic):
            assert got == pytest.approx(want, rel=1e-6, abs=1e-6)


def test_finite_difference_hessian_on_quadratic():
    hess = finite_difference_hessian(lambda x: x[0] ** 2 + 3 * x[0] * x[1] - x[1] ** 2, [0.5, -1.0])
    assert hess == pytest.approx(np.array([[2.0, 3.0], [3.0, -2.0]]), abs=1e-6)


@pytest.mark.parametrize("n,p", GRID)
def test_closed_form_critical_point(n, p):
    result = find_critical_point(n, p)
    assert result.exists
    assert result.a_star == 0.0
    assert result.c_star == pytest.approx(math.sqrt(n / p))
    assert result.s_star == pytest.approx(maximal_value(n, p), rel=1e-12)
    assert result.gradient_norm_at_star < 1e-10
    assert result.kind == "maximum"


@pytest.mark.parametrize("n,p", GRID)
def test_ascent_finds_maximum(n, p):
    result = find_critical_point(n, p, "ascent")
    assert result.exists
    assert result.kind == "maximum"
    assert abs(result.a_star) < 1e-7
    assert result.c_star == pytest.approx(math.sqrt(n / p), abs=1e-7)
    assert 0 < result.iterations < 1000


@pytest.mark.parametrize("n,p", [(1, 1), (4, 1), (2, 3)])
def test_hessian_is_isotropic_at_maximum(n, p):
    kind, eigenvalues = classify_critical_point(n, p, 0.0, math.sqrt(n / p))
    expected = -4 * p / math.sqrt(n / p)
    assert kind == "maximum"
    assert eigenvalues == pytest.approx([expected, expected], rel=1e-4)


@pytest.mark.parametrize("n,p,a,c", [(1, 1, 1.0, 1.0), (2, 3, -0.7, 0.4), (4, 1, 2.5, 3.0)])
def test_hessian_is_negative_definite_everywhere(n, p, a, c):
    # s_aa = −4p/c, s_ac = 4pa/c², s_cc = −4(n + pa²)/c³
    expected = np.array([[-4 * p / c, 4 * p * a / c ** 2], [4 * p * a / c ** 2, -4 * (n + p * a * a) / c ** 3]])
    kind, eigenvalues = classify_critical_point(n, p, a, c)
    assert kind == "maximum"
    assert eigenvalues == pytest.approx(sorted(np.linalg.eigvalsh(expected)), rel=1e-4, abs=1e-4)


@pytest.mark.parametrize(
    "hess,kind",
    [
        ([[1.0, 0.0], [0.0, -2.0]], "saddle"),
        ([[0.0, 1.0], [1.0, 0.0]], "saddle"),
        ([[2.0, 0.0], [0.0, 3.0]], "minimum"),
        ([[-2.0, 0.0], [0.0, 0.0]], "degenerate"),
    ],
)
def test_classify_hessian(hess, kind):
    assert classify_hessian(np.array(hess))[0] == kind


def test_saddle_from_finite_difference_hessian():
    hess = finite_difference_hessian(lambda x: x[0] ** 2 - x[1] ** 2, [0.0, 0.0])
    kind, eigenvalues = classify_hessian(hess)
    assert kind == "saddle"
    assert eigenvalues == pytest.approx([-2.0, 2.0], abs=1e-6)


@pytest.mark.parametrize("n,p", [(0, 1), (0, 3), (2, 0)])
def test_no_critical_point_when_factor_degenerates(n, p):
    result = find_critical_point(n, p)
    assert not result.exists
    assert result.reason == "no_critical_points"
    assert result.kind == "none"
    assert result.a_star is None
    with pytest.raises(ParameterError):
        gradient_ascent(n, p)


def test_unknown_method():
    with pytest.raises(ParameterError):
        find_critical_point(1, 1, "newton")


def test_ascent_reports_non_convergence():
    config = AscentConfig(max_iter=3)
    with pytest.raises(AscentNotConvergedError) as info:
        gradient_ascent(1, 4, config, start=(2.0, 3.0))
    assert info.value.iterations == 3
    assert info.value.gradient_norm > 0
    assert info.value.c > 0


def test_ascent_from_custom_start():
    result = gradient_ascent(4, 1, start=(-1.0, 0.3))
    assert result.c == pytest.approx(2.0, abs=1e-7)
    assert result.value == pytest.approx(80.0, abs=1e-9)


@pytest.mark.parametrize("n,p", [(1, 1), (1, 4), (3, 2)])
def test_maximum_dominates_random_samples(n, p):
    rng = np.random.default_rng(0)
    peak = maximal_value(n, p)
    for a, c in zip(rng.uniform(-3, 3, 500), rng.uniform(0.1, 5, 500)):
        assert scalar_functional(n, p, a, c) <= peak + 1e-9


def test_hermitian_ricci_only_at_critical_metric():
    assert hermitian_ricci_report(1, 4)
    assert hermitian_ricci_at(1, 4, 0.0, 0.5)
    assert not hermitian_ricci_at(1, 1, 1.0, 1.0)
    assert not hermitian_ricci_at(1, 4, 0.0, 1.0)


def test_hermitian_ricci_report_requires_both_factors():
    with pytest.raises(ParameterError):
        hermitian_ricci_report(0, 2)


@pytest.mark.parametrize("n,p", [(0, 1), (2, 0)])
def test_hermitian_ricci_scan_degenerate(n, p):
    scan = hermitian_ricci_scan(n, p, samples=30, seed=3)
    assert scan["samples"] == 30
    assert scan["hermitian_fraction"] == 0.0
    assert scan["min_residual"] > 1e-9


def test_scan_grid_order():
    rows = scan_grid(1, 1, [0.0, 1.0], [1.0, 2.0])
    assert [(a, c) for a, c, _ in rows] == [(0.0, 1.0), (0.0, 2.0), (1.0, 1.0), (1.0, 2.0)]
    assert rows[0][2] == pytest.approx(12.0)


def test_critical_point_to_dict():
    data = find_critical_point(1, 1).to_dict()
    assert data["exists"] is True
    assert data["method"] == "closed_form"
    assert len(data["hessian_eigenvalues"]) == 2


@pytest.mark.parametrize("n,p", [(0, 1), (1, 1), (3, 3), (3, 1)])
@pytest.mark.parametrize("a", [-3.0, -0.1, 0.0, 0.1, 2.0])
@pytest.mark.parametrize("c", [0.1, 0.12, 0.6, 4.9])
def test_finite_difference_gradient_holds_at_small_c(n, p, a, c):
    numeric = finite_difference_gradient(lambda x: scalar_functional(n, p, x[0], x[1]), [a, c])
    analytic = scalar_gradient(n, p, a, c)
    assert max(relative_error(numeric[i], analytic[i]) for i in range(2)) < 1e-9
