"""
Функционал скалярной кривизны s(a, c) на семействе g(a,c), его градиент,
поиск и классификация критической точки.
"""
import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from algebra import ParameterError, SpaceParams
from config import ASCENT, RUN, TOLERANCES, AscentConfig
from curvature import hermitian_ricci_residual, ricci_from_riemann, scalar_closed_form
from structures import MetricParams
from utils import make_rng

logger = logging.getLogger(__name__)

METHODS = ("closed_form", "ascent")


class AscentNotConvergedError(Exception):
    """Подъём не сошёлся; хранит последнюю итерацию."""

    def __init__(self, message: str, a: float, c: float, iterations: int, gradient_norm: float):
        super().__init__(message)
        self.a = a
        self.c = c
        self.iterations = iterations
        self.gradient_norm = gradient_norm


@dataclass(frozen=True)
class AscentResult:
    a: float
    c: float
    iterations: int
    gradient_norm: float
    value: float


@dataclass(frozen=True)
class CriticalPointResult:
    n: int
    p: int
    method: str
    exists: bool
    a_star: Optional[float] = None
    c_star: Optional[float] = None
    s_star: Optional[float] = None
    kind: str = "none"
    gradient_norm_at_star: Optional[float] = None
    hessian_eigenvalues: List[float] = field(default_factory=list)
    iterations: int = 0
    reason: Optional[str] = None

    def to_dict(self) -> dict:
        return asdict(self)


def scalar_functional(n: int, p: int, a: float, c: float) -> float:
    """
    s(a, c) = 4n(1 + n − 1/(2c)) + 4p(1 + p − (a² + c²)/(2c))

    Examples:
        >>> scalar_functional(1, 1, 0.0, 1.0)
        12.0
        >>> scalar_functional(4, 1, 0.0, 2.0)
        80.0
    """
    return scalar_closed_form(SpaceParams(n, p), MetricParams(a, c))


def scalar_gradient(n: int, p: int, a: float, c: float) -> Tuple[float, float]:
    """(∂s/∂a, ∂s/∂c) = (−4pa/c, 2(n − p(c² − a²))/c²)"""
    space, m = SpaceParams(n, p), MetricParams(a, c)
    a, c = m.a, m.c
    return -4 * space.p * a / c, 2 * (space.n - space.p * (c * c - a * a)) / (c * c)


def printed_partials(n: int, p: int, a: float, c: float) -> Tuple[float, float]:
    """Частные производные в записи без множителя 4: −pa/c и (n − p(c² − a²))/(2c²)."""
    space, m = SpaceParams(n, p), MetricParams(a, c)
    a, c = m.a, m.c
    return -space.p * a / c, (space.n - space.p * (c * c - a * a)) / (2 * c * c)


def finite_difference_gradient(f: Callable[[np.ndarray], float], x: Sequence[float],
                               step: float = ASCENT.fd_step, floor: float = ASCENT.fd_floor) -> np.ndarray:
    """
    Центральная схема четвёртого порядка
    (−f(x + 2h) + 8f(x + h) − 8f(x − h) + f(x − 2h)) / 12h
    с шагом h_i = step · max(|x_i|, floor) по каждой координате.

    Производные s по c растут как 1/c^k, отсюда шаг, пропорциональный координате.
    """
    x = np.array(x, dtype=float)
    grad = np.zeros(len(x))
    for i in range(len(x)):
        h = step * max(abs(x[i]), floor)
        values = []
        for k in (2, 1, -1, -2):
            shifted = np.array(x)
            shifted[i] += k * h
            values.append(f(shifted))
        grad[i] = (-values[0] + 8.0 * values[1] - 8.0 * values[2] + values[3]) / (12.0 * h)
    return grad


def finite_difference_hessian(f: Callable[[np.ndarray], float], x: Sequence[float],
                              step: float = ASCENT.hessian_step) -> np.ndarray:
    """Центральная разностная схема для вторых производных, симметричный результат."""
    x = np.array(x, dtype=float)
    size = len(x)
    hess = np.zeros((size, size))
    for i in range(size):
        for j in range(i, size):
            total = 0.0
            for si, sj, sign in ((1, 1, 1), (1, -1, -1), (-1, 1, -1), (-1, -1, 1)):
                shifted = np.array(x)
                shifted[i] += si * step
                shifted[j] += sj * step
                total += sign * f(shifted)
            hess[i, j] = hess[j, i] = total / (4.0 * step * step)
    return hess


def _increment(n: int, p: int, a: float, c: float, da: float, dc: float) -> float:
    """
    s(a + da, c + dc) − s(a, c) без вычитания близких величин:
    2n·dc/(c c′) − 2p((2a·da + da²)c − a²·dc)/(c c′) − 2p·dc
    """
    c_new = c + dc
    scale = c * c_new
    return 2 * n * dc / scale - 2 * p * ((2 * a * da + da * da) * c - a * a * dc) / scale - 2 * p * dc


def gradient_ascent(n: int, p: int, config: AscentConfig = ASCENT,
                    start: Optional[Tuple[float, float]] = None) -> AscentResult:
    """
    Градиентный подъём с дроблением шага (условие Армихо) из точки start.

    Raises:
        ParameterError: n·p = 0 (критических точек нет)
        AscentNotConvergedError: исчерпан лимит итераций или шаг стал меньше min_step
    """
    space = SpaceParams(n, p)
    if space.n * space.p == 0:
        raise ParameterError(f"Функционал s не имеет критических точек при n={space.n}, p={space.p}")
    a, c = start if start is not None else (config.start_a, config.start_c)
    MetricParams(a, c)

    norm = math.inf
    for iteration in range(config.max_iter):
        ga, gc = scalar_gradient(n, p, a, c)
        norm = math.hypot(ga, gc)
        if norm < config.grad_tol:
            logger.debug("Подъём сошёлся за %d итераций: a=%.17g, c=%.17g", iteration, a, c)
            return AscentResult(a, c, iteration, norm, scalar_functional(n, p, a, c))

        step = config.step
        while True:
            da, dc = step * ga, step * gc
            if c + dc > 0 and _increment(n, p, a, c, da, dc) >= config.armijo * step * norm * norm:
                break
            step *= 0.5
            if step < config.min_step:
                raise AscentNotConvergedError(
                    f"Шаг подъёма выродился (|∇s| = {norm:.3e}) на итерации {iteration}",
                    a, c, iteration, norm,
                )
        a, c = a + da, c + dc

    logger.warning("Подъём не сошёлся за %d итераций, |∇s| = %.3e", config.max_iter, norm)
    raise AscentNotConvergedError(
        f"Подъём не сошёлся за {config.max_iter} итераций (|∇s| = {norm:.3e})",
        a, c, config.max_iter, norm,
    )


def classify_hessian(hess: np.ndarray, tol: float = TOLERANCES.hessian) -> Tuple[str, List[float]]:
    """
    Тип критической точки по собственным значениям симметричного гессиана.

    Returns:
        tuple: ("maximum" | "minimum" | "saddle" | "degenerate", собственные значения)

    Examples:
        >>> classify_hessian(np.array([[1.0, 0.0], [0.0, -2.0]]))[0]
        'saddle'
    """
    eigenvalues = [float(v) for v in np.linalg.eigvalsh(hess)]
    if all(v < -tol for v in eigenvalues):
        kind = "maximum"
    elif all(v > tol for v in eigenvalues):
        kind = "minimum"
    elif min(eigenvalues) < -tol and max(eigenvalues) > tol:
        kind = "saddle"
    else:
        kind = "degenerate"
    return kind, eigenvalues


def classify_critical_point(n: int, p: int, a: float, c: float,
                            step: float = ASCENT.hessian_step,
                            tol: float = TOLERANCES.hessian) -> Tuple[str, List[float]]:
    """
    Тип точки по собственным значениям разностного гессиана s.

    Гессиан s отрицательно определён в любой точке (s_aa = −4p/c, det = 16np/c⁴),
    поэтому при n·p > 0 результат всегда "maximum".
    """
    hess = finite_difference_hessian(lambda x: scalar_functional(n, p, x[0], x[1]), [a, c], step)
    return classify_hessian(hess, tol)


def maximal_value(n: int, p: int) -> float:
    """4n(n + 1) + 4p(p + 1) − 4√(np)"""
    return 4 * n * (n + 1) + 4 * p * (p + 1) - 4 * math.sqrt(n * p)


def find_critical_point(n: int, p: int, method: str = "closed_form",
                        config: AscentConfig = ASCENT) -> CriticalPointResult:
    """
    Критическая точка s(a, c).

    При n·p = 0 возвращает exists=False; иначе (0, √(n/p)) напрямую
    или градиентным подъёмом, с классификацией по гессиану.
    """
    if method not in METHODS:
        raise ParameterError(f"Неизвестный метод '{method}', ожидалось одно из {METHODS}")
    space = SpaceParams(n, p)
    if space.n * space.p == 0:
        logger.info("n=%d, p=%d: у функционала s нет критических точек", space.n, space.p)
        return CriticalPointResult(space.n, space.p, method, exists=False, reason="no_critical_points")

    iterations = 0
    if method == "closed_form":
        a, c = 0.0, math.sqrt(space.n / space.p)
    else:
        result = gradient_ascent(space.n, space.p, config)
        a, c, iterations = result.a, result.c, result.iterations

    kind, eigenvalues = classify_critical_point(space.n, space.p, a, c)
    return CriticalPointResult(
        n=space.n,
        p=space.p,
        method=method,
        exists=True,
        a_star=a,
        c_star=c,
        s_star=scalar_functional(space.n, space.p, a, c),
        kind=kind,
        gradient_norm_at_star=math.hypot(*scalar_gradient(space.n, space.p, a, c)),
        hessian_eigenvalues=eigenvalues,
        iterations=iterations,
    )


def hermitian_ricci_at(n: int, p: int, a: float, c: float, tol: float = TOLERANCES.hermitian) -> bool:
    """Ric(IX, IY) = Ric(X, Y) на всех базисных парах для g(a, c)."""
    space, m = SpaceParams(n, p), MetricParams(a, c)
    return hermitian_ricci_residual(space, m, ricci_from_riemann(space, m)) <= tol


def hermitian_ricci_report(n: int, p: int) -> bool:
    """Эрмитовость Риччи в критической точке (0, √(n/p)); требует n, p ≥ 1."""
    space = SpaceParams(n, p)
    if space.n == 0 or space.p == 0:
        raise ParameterError("Критическая метрика определена только при n, p ≥ 1")
    return hermitian_ricci_at(space.n, space.p, 0.0, math.sqrt(space.n / space.p))


def hermitian_ricci_scan(n: int, p: int, samples: int = 200, seed: int = RUN.seed,
                         a_range: Tuple[float, float] = RUN.a_range,
                         c_range: Tuple[float, float] = RUN.c_range) -> Dict[str, float]:
    """
    Доля случайных (a, c), где Риччи I-эрмитов, и минимальная невязка.

    При n·p = 0 ожидается доля 0: таких метрик g(a,c) нет.
    """
    space = SpaceParams(n, p)
    rng = make_rng(seed)
    hits = 0
    smallest = math.inf
    for a, c in zip(rng.uniform(*a_range, samples), rng.uniform(*c_range, samples)):
        m = MetricParams(a, c)
        residual = hermitian_ricci_residual(space, m, ricci_from_riemann(space, m))
        smallest = min(smallest, residual)
        hits += residual <= TOLERANCES.hermitian
    return {"samples": samples, "hermitian_fraction": hits / samples if samples else 0.0,
            "min_residual": smallest}


def scan_grid(n: int, p: int, a_values: Sequence[float], c_values: Sequence[float]) -> List[Tuple[float, float, float]]:
    """Строки (a, c, s) по прямоугольной сетке; порядок: a внешний, c внутренний."""
    SpaceParams(n, p)
    return [(float(a), float(c), scalar_functional(n, p, a, c)) for a in a_values for c in c_values]


if __name__ == "__main__":
    import doctest
    doctest.testmod()
