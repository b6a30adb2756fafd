"""
Наборы проверок для команды verify.

Каждая проверка собирает худшую невязку по сетке пространств (n, p) и
случайным метрикам (a, c). Порог проверки равен её собственному допуску из
TOLERANCES, умноженному на tolerance / RUN.tolerance; логические проверки
(ожидаемый отрицательный результат) не масштабируются.
"""
import logging
import math
from dataclasses import asdict, dataclass
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np

from algebra import SpaceParams, bracket, get_algebra, reductivity_residual
from config import RUN, TOLERANCES
from connection import (
    connection_table,
    metric_compatibility_residual,
    torsion_residual,
    u_closed_form_array,
    u_symmetry_residual,
    u_tensor_array,
    u_trace_vector,
)
from curvature import (
    curvature_identity_residuals,
    einstein_check,
    hermitian_ricci_residual,
    ricci_closed_form_matrix,
    ricci_eigenvalues,
    ricci_formula_matrix,
    ricci_from_riemann,
    riemann,
    riemann_tensor,
    scalar_curvature,
    sectional,
    sectional_extremes,
)
from optimize import (
    find_critical_point,
    finite_difference_gradient,
    hermitian_ricci_scan,
    maximal_value,
    printed_partials,
    scalar_functional,
    scalar_gradient,
)
from structures import (
    MetricParams,
    associated_metric,
    complex_structure,
    faulty_structure,
    frame_matrix,
    hermitian_metric_residual,
    kahler_defect,
    metric_table,
    nijenhuis_residual,
    positivity_and_compatibility_check,
)
from utils import make_rng, max_abs, relative_error

logger = logging.getLogger(__name__)

# Пары (n, p) для режимов секционной кривизны: по одной на режим и n = p
SECTIONAL_SPACES = ((1, 16), (1, 4), (3, 4), (2, 2))
ASCENT_LIMIT = 4


@dataclass
class CheckResult:
    name: str
    reference: str
    passed: bool
    residual: float
    detail: str = ""


@dataclass
class VerificationReport:
    checks: List[CheckResult]
    spaces: List[Tuple[int, int]]
    tolerance: float
    seed: int
    metrics_per_space: int
    samples: int

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    def failed(self) -> List[CheckResult]:
        return [check for check in self.checks if not check.passed]

    def rows(self) -> List[dict]:
        return [asdict(check) for check in self.checks]

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "tolerance": self.tolerance,
            "seed": self.seed,
            "metrics_per_space": self.metrics_per_space,
            "samples": self.samples,
            "spaces": [list(s) for s in self.spaces],
            "checks": self.rows(),
        }


@dataclass
class _Entry:
    reference: str
    residual: float = 0.0
    passed: bool = True
    detail: str = ""


class _Collector:
    """Худшие невязки по именам проверок, в порядке первого появления."""

    def __init__(self, scale: float):
        self.scale = scale
        self.entries: Dict[str, _Entry] = {}

    def _entry(self, name: str, reference: str) -> _Entry:
        return self.entries.setdefault(name, _Entry(reference))

    def record(self, name: str, reference: str, residual: float, limit: float, where: str = "") -> None:
        entry = self._entry(name, reference)
        residual = float(residual)
        ok = math.isfinite(residual) and residual <= limit * self.scale
        if not math.isfinite(residual) or residual > entry.residual:
            entry.residual = residual
            if where:
                entry.detail = f"худший случай: {where}"
        if not ok:
            entry.passed = False
            entry.detail = f"превышен порог {limit * self.scale:.3e}: {where}"

    def flag(self, name: str, reference: str, ok: bool, where: str = "") -> None:
        entry = self._entry(name, reference)
        if not ok:
            entry.passed = False
            entry.residual = 1.0
            entry.detail = f"не выполнено: {where}"

    def results(self) -> List[CheckResult]:
        return [CheckResult(name, e.reference, e.passed, e.residual, e.detail) for name, e in self.entries.items()]


def _scaled(value: np.ndarray, reference: np.ndarray) -> float:
    """max|value − reference| / max(1, max|reference|)"""
    return max_abs(np.asarray(value) - np.asarray(reference)) / max(1.0, max_abs(reference))


def _where(space: SpaceParams, m: Optional[MetricParams] = None) -> str:
    if m is None:
        return f"n={space.n}, p={space.p}"
    return f"n={space.n}, p={space.p}, a={m.a:.6g}, c={m.c:.6g}"


def expected_bracket_table(space: SpaceParams) -> np.ndarray:
    """
    Таблица скобок p-векторов, заданная явными правилами:
        [X, Y_{2ν−1}] = −Y_{2ν},  [X, Y_{2ν}] = Y_{2ν−1},  [Y_{2ν−1}, Y_{2ν}] = −2X + iT_{νν},
        [Y_{2ν}, Y_{2μ}] = [Y_{2ν−1}, Y_{2μ−1}] = −Z_{νμ},  [Y_{2ν}, Y_{2μ−1}] = −iT_{νμ}  (ν ≠ μ),
    остальные скобки (в том числе между сомножителями) равны нулю.
    """
    algebra = get_algebra(space)
    table = np.zeros((space.d, space.d, algebra.dim))

    def put(u: int, v: int, terms: Dict[int, float]) -> None:
        for k, coef in terms.items():
            table[u, v, k] += coef
            table[v, u, k] -= coef

    for block in (1, 2):
        x = space.x_index(block)

        def h(kind: str, nu: int, mu: int) -> int:
            return algebra.index_of(f"H{block}[{kind} {max(nu, mu)},{min(nu, mu)}]")

        for nu in range(1, space.rank(block) + 1):
            odd, even = space.y_index(block, 2 * nu - 1), space.y_index(block, 2 * nu)
            put(x, odd, {even: -1.0})
            put(x, even, {odd: 1.0})
            put(odd, even, {x: -2.0, h("iT", nu, nu): 1.0})
            for mu in range(1, nu):
                odd_m, even_m = space.y_index(block, 2 * mu - 1), space.y_index(block, 2 * mu)
                # Z_{νμ} при ν > μ есть образующая базиса
                put(even, even_m, {h("Z", nu, mu): -1.0})
                put(odd, odd_m, {h("Z", nu, mu): -1.0})
                put(even, odd_m, {h("iT", nu, mu): -1.0})
                put(even_m, odd, {h("iT", nu, mu): -1.0})
    return table


def _random_metrics(rng: np.random.Generator, count: int,
                    a_range: Tuple[float, float], c_range: Tuple[float, float]) -> List[MetricParams]:
    return [MetricParams(rng.uniform(*a_range), rng.uniform(*c_range)) for _ in range(count)]


def _algebra_suite(out: _Collector, space: SpaceParams, rng: np.random.Generator) -> None:
    algebra = get_algebra(space)
    where = _where(space)
    out.record("bracket_table", "brackets", max_abs(algebra.pp_brackets - expected_bracket_table(space)),
               TOLERANCES.algebra, where)
    out.record("reductivity", "brackets", reductivity_residual(space), TOLERANCES.algebra, where)

    for _ in range(5):
        a, b, c = (algebra.element(rng.standard_normal(algebra.dim)) for _ in range(3))
        out.record("antisymmetry", "brackets", max_abs((bracket(a, b) + bracket(b, a)).coeffs),
                   TOLERANCES.algebra * 100, where)
        jacobi = bracket(a, bracket(b, c)) + bracket(b, bracket(c, a)) + bracket(c, bracket(a, b))
        out.record("jacobi", "brackets", max_abs(jacobi.coeffs), 1e-10, where)
        out.record("coefficient_roundtrip", "brackets",
                   max_abs(algebra.coefficients(*a.blocks) - a.coeffs), TOLERANCES.algebra, where)


def _structures_suite(out: _Collector, space: SpaceParams, metrics: Iterable[MetricParams],
                      rng: np.random.Generator) -> None:
    for m in _random_metrics(rng, 5, RUN.association_a_range, RUN.association_c_range):
        report = positivity_and_compatibility_check(space, m)
        out.record("positive_association", "positivity", report.compatibility_residual,
                   TOLERANCES.structure, _where(space, m))
        out.flag("positive_association", "positivity", report.positive, _where(space, m))
        faulty = positivity_and_compatibility_check(space, m, faulty_structure(space, m))
        out.flag("faulty_structure_rejected", "positivity", not faulty.positive, _where(space, m))

    for m in metrics:
        where = _where(space, m)
        out.record("j_squared", "complex_structure", complex_structure(space, m).square_residual(),
                   TOLERANCES.algebra, where)
        out.record("metric_table", "complex_structure",
                   max_abs(associated_metric(space, m).sym - metric_table(space, m).sym),
                   TOLERANCES.algebra, where)
        frame = frame_matrix(space, m)
        out.record("frame_orthonormal", "complex_structure",
                   max_abs(frame.T @ associated_metric(space, m).sym @ frame - np.eye(space.d)),
                   TOLERANCES.structure, where)
        out.record("nijenhuis", "complex_structure", nijenhuis_residual(space, m), TOLERANCES.structure, where)
        out.record("hermitian_metric", "complex_structure", hermitian_metric_residual(space, m),
                   TOLERANCES.structure, where)

    defect = kahler_defect(space)
    out.flag("not_kahler", "complex_structure", defect > 1.0, f"{_where(space)}, max|dω| = {defect:.6g}")


def _connection_suite(out: _Collector, space: SpaceParams, metrics: Iterable[MetricParams]) -> None:
    for m in metrics:
        where = _where(space, m)
        closed = u_closed_form_array(space, m)
        out.record("u_tensor", "connection", _scaled(u_tensor_array(space, m), closed),
                   TOLERANCES.connection, where)
        table = connection_table(space, m)
        scale = max(1.0, max_abs(table.coeffs))
        out.record("u_symmetry", "connection", u_symmetry_residual(table), TOLERANCES.connection, where)
        out.record("torsion_free", "connection", torsion_residual(table) / scale, TOLERANCES.connection, where)
        out.record("metric_compatible", "connection", metric_compatibility_residual(table) / scale,
                   TOLERANCES.connection, where)
        out.record("u_trace_vanishes", "connection", max_abs(u_trace_vector(space, m)) / scale,
                   TOLERANCES.connection, where)


def _curvature_suite(out: _Collector, space: SpaceParams, metrics: Iterable[MetricParams],
                     rng: np.random.Generator) -> None:
    for m in metrics:
        where = _where(space, m)
        scale = max(1.0, max_abs(riemann_tensor(space, m)))
        identities = curvature_identity_residuals(space, m)
        for name, value in identities.items():
            out.record(f"riemann_{name}", "curvature_identities", value / scale, TOLERANCES.curvature_identity, where)

        x, y, w = (rng.standard_normal(space.d) for _ in range(3))
        direct = riemann(space, m, x, y, w)
        tensor = np.einsum("i,j,k,ijkl->l", x, y, w, riemann_tensor(space, m))
        out.record("riemann_direct", "curvature_identities", _scaled(tensor, direct),
                   TOLERANCES.curvature_identity, where)

        closed = ricci_closed_form_matrix(space, m)
        oracle = ricci_from_riemann(space, m)
        formula = ricci_formula_matrix(space, m)
        out.record("ricci_three_way", "ricci", max(_scaled(oracle, closed), _scaled(formula, closed)),
                   TOLERANCES.ricci, where)

        trace, closed_s = scalar_curvature(space, m)
        out.record("scalar_trace", "ricci", relative_error(trace, closed_s), TOLERANCES.scalar, where)

        eigen, spectrum = ricci_eigenvalues(space, m)
        x1, x2 = space.x_index(1), space.x_index(2)
        block = closed[np.ix_([x1, x2], [x1, x2])]
        out.record("ricci_eigen_block", "ricci", _scaled(sorted(eigen[:2]), np.linalg.eigvalsh(block)),
                   TOLERANCES.ricci, where)
        for value, count in ((eigen[2] if space.n else None, 2 * space.n),
                             (eigen[-1] if space.p else None, 2 * space.p)):
            if value is None:
                continue
            hits = sum(abs(v - value) <= TOLERANCES.ricci * max(1.0, abs(value)) for v in spectrum)
            out.flag("ricci_spectrum_multiplicity", "ricci", hits >= count, where)

        sample_a, sample_b = rng.standard_normal(space.d), rng.standard_normal(space.d)
        k = sectional(space, m, sample_a, sample_b)
        k_mixed = sectional(space, m, 2.0 * sample_a + sample_b, sample_a - 3.0 * sample_b)
        out.record("sectional_plane_invariance", "curvature_identities", relative_error(k_mixed, k),
                   TOLERANCES.curvature_identity, where)


def _special_metrics_suite(out: _Collector, space: SpaceParams) -> None:
    n, p = space.n, space.p
    where = _where(space)
    if n == p:
        m = MetricParams(0.0, 1.0)
        gram = associated_metric(space, m).sym
        out.record("einstein_equal_dims", "einstein", _scaled(ricci_from_riemann(space, m), 2 * n * gram),
                   TOLERANCES.einstein, where)
        lam = einstein_check(space, m)
        out.flag("einstein_equal_dims", "einstein", lam is not None and abs(lam - 2 * n) <= 1e-9, where)
    if n >= 1 and p >= 1:
        critical = MetricParams(0.0, math.sqrt(n / p))
        if n != p:
            out.flag("not_einstein_unequal_dims", "einstein", einstein_check(space, critical) is None, where)
        out.record("hermitian_ricci_critical", "critical_point",
                   hermitian_ricci_residual(space, critical), TOLERANCES.hermitian, where)
        generic = MetricParams(1.0, 1.0)
        out.flag("hermitian_ricci_negative_control", "critical_point",
                 hermitian_ricci_residual(space, generic) > TOLERANCES.hermitian, where)


def _optimize_suite(out: _Collector, space: SpaceParams, rng: np.random.Generator) -> None:
    n, p = space.n, space.p
    where = _where(space)

    for a, c in zip(rng.uniform(*RUN.a_range, RUN.gradient_points), rng.uniform(*RUN.c_range, RUN.gradient_points)):
        analytic = np.array(scalar_gradient(n, p, a, c))
        numeric = finite_difference_gradient(lambda x: scalar_functional(n, p, x[0], x[1]), [a, c])
        error = max(relative_error(numeric[i], analytic[i]) for i in range(2))
        out.record("gradient_finite_difference", "critical_point", error, TOLERANCES.gradient_rel,
                   f"{where}, a={a:.6g}, c={c:.6g}")

        printed = np.array(printed_partials(n, p, a, c))
        out.record("printed_partials_ratio", "critical_point", _scaled(analytic, 4.0 * printed),
                   TOLERANCES.algebra, where)
        out.flag("printed_partials_signs", "critical_point",
                 bool(np.all(np.sign(analytic) == np.sign(printed))), f"{where}, a={a:.6g}, c={c:.6g}")

    if n * p == 0:
        result = find_critical_point(n, p)
        out.flag("no_critical_point_degenerate", "critical_point", not result.exists, where)
        scan = hermitian_ricci_scan(n, p, samples=RUN.hermitian_scan_points, seed=int(rng.integers(2 ** 31)))
        out.flag("no_hermitian_ricci_degenerate", "critical_point", scan["hermitian_fraction"] == 0.0,
                 f"{where}, min residual {scan['min_residual']:.3e}")
        return

    closed = find_critical_point(n, p, "closed_form")
    expected = maximal_value(n, p)
    out.record("critical_value", "critical_point", relative_error(closed.s_star, expected),
               TOLERANCES.scalar, where)
    out.flag("critical_kind", "critical_point", closed.kind == "maximum", f"{where}: {closed.kind}")
    if n <= ASCENT_LIMIT and p <= ASCENT_LIMIT:
        ascent = find_critical_point(n, p, "ascent")
        distance = math.hypot(ascent.a_star - closed.a_star, ascent.c_star - closed.c_star)
        out.record("ascent_matches_closed_form", "critical_point", distance, TOLERANCES.critical_point,
                   f"{where}, итераций {ascent.iterations}")

    a = rng.uniform(*RUN.a_range, RUN.maximality_points)
    c = rng.uniform(*RUN.c_range, RUN.maximality_points)
    # s(a, c) сразу на всей выборке
    values = 4 * n * (1 + n - 1 / (2 * c)) + 4 * p * (1 + p - (a * a + c * c) / (2 * c))
    excess = max(0.0, float(values.max()) - expected)
    out.record("critical_maximality", "critical_point", excess, TOLERANCES.scalar, where)


def _sectional_suite(out: _Collector, spaces: Iterable[SpaceParams], samples: int, seed: int) -> None:
    for space in spaces:
        report = sectional_extremes(space, samples=samples, seed=seed)
        where = f"{_where(space)}, режим {report.regime}"
        achieved = max(abs(report.named_min - report.bound_low), abs(report.named_max - report.bound_high))
        out.record("sectional_bounds_achieved", "sectional", achieved, TOLERANCES.sectional, where)
        out.record("sectional_samples_in_bounds", "sectional", 1.0 - report.samples_in_bounds,
                   TOLERANCES.sectional, where)


def default_spaces(n_max: int, p_max: int) -> List[SpaceParams]:
    """Все (n, p) из {0..n_max} × {0..p_max}, кроме (0, 0)."""
    return [SpaceParams(n, p) for n in range(n_max + 1) for p in range(p_max + 1) if n + p >= 1]


def run_verification(
    spaces: List[SpaceParams],
    metrics_per_space: int = RUN.metrics_per_space,
    samples: int = RUN.samples,
    seed: int = RUN.seed,
    tolerance: float = RUN.tolerance,
) -> VerificationReport:
    """
    Все наборы проверок по заданным пространствам.

    Args:
        spaces: пространства (n, p)
        metrics_per_space: число случайных (a, c) на пространство
        samples: случайных плоскостей для секционной кривизны
        seed: зерно генератора
        tolerance: масштаб порогов (RUN.tolerance соответствует штатным допускам)
    """
    out = _Collector(tolerance / RUN.tolerance)
    rng = make_rng(seed)

    for space in spaces:
        logger.info("Проверка n=%d, p=%d", space.n, space.p)
        metrics = _random_metrics(rng, metrics_per_space, RUN.verify_a_range, RUN.verify_c_range)
        _algebra_suite(out, space, rng)
        _structures_suite(out, space, metrics, rng)
        _connection_suite(out, space, metrics)
        _curvature_suite(out, space, metrics, rng)
        _special_metrics_suite(out, space)
        _optimize_suite(out, space, rng)

    sectional_spaces = [SpaceParams(n, p) for n, p in SECTIONAL_SPACES]
    sectional_spaces += [s for s in spaces if 1 <= s.n <= s.p and s not in sectional_spaces]
    _sectional_suite(out, sectional_spaces, samples, seed)

    report = VerificationReport(
        checks=out.results(),
        spaces=[(s.n, s.p) for s in spaces],
        tolerance=tolerance,
        seed=seed,
        metrics_per_space=metrics_per_space,
        samples=samples,
    )
    for check in report.failed():
        logger.warning("Проверка %s не пройдена: невязка %.3e (%s)", check.name, check.residual, check.detail)
    return report
