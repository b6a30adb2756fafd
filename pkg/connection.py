"""
Инвариантная связность Леви-Чивиты метрики g(a,c).

D_X Y = ½[X,Y]_p + U(X,Y), где симметричный тензор U находится из
    2g(U(X,Y), Z) = g([Z,X]_p, Y) + g(X, [Z,Y]_p)
решением линейной системы с матрицей Грама g. Таблица U в замкнутой форме
сохранена отдельно и служит регрессионной проверкой.
"""
import logging
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import linalg

from algebra import SpaceParams, get_algebra
from structures import MetricParams, associated_metric, frame_matrix
from utils import max_abs

logger = logging.getLogger(__name__)


class SingularGramError(Exception):
    """Матрица Грама метрики вырождена (при c > 0 не возникает)."""

    def __init__(self, message: str, space: SpaceParams = None, metric: MetricParams = None):
        super().__init__(message)
        self.space = space
        self.metric = metric


@dataclass(frozen=True, eq=False)
class ConnectionTable:
    """coeffs[i, j, k]: k-я компонента D_{e_i} e_j в p-базисе."""
    coeffs: np.ndarray
    u: np.ndarray
    space: SpaceParams
    metric: MetricParams

    def nabla(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        return np.einsum("i,j,ijk->k", x, y, self.coeffs)

    @property
    def gram(self) -> np.ndarray:
        return associated_metric(self.space, self.metric).sym


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


def _solve_gram(space: SpaceParams, m: MetricParams, rhs: np.ndarray) -> np.ndarray:
    """Решение G·u = rhs по последней оси rhs."""
    gram = associated_metric(space, m).sym
    lead = rhs.shape[:-1]
    try:
        solved = linalg.solve(gram, rhs.reshape(-1, space.d).T, assume_a="pos")
    except linalg.LinAlgError as exc:
        raise SingularGramError(f"Матрица Грама g(a={m.a}, c={m.c}) вырождена: {exc}", space, m) from exc
    return solved.T.reshape(lead + (space.d,))


def u_tensor_array(space: SpaceParams, m: MetricParams) -> np.ndarray:
    """
    U(e_i, e_j) для всех пар p-базиса: массив (d, d, d).

    Правая часть: rhs[i, j, k] = g([e_k, e_i]_p, e_j) + g(e_i, [e_k, e_j]_p).
    """
    gram = associated_metric(space, m).sym
    table = get_algebra(space).pp_brackets[:, :, : space.d]
    rhs = np.einsum("kil,lj->ijk", table, gram) + np.einsum("il,kjl->ijk", gram, table)
    return _solve_gram(space, m, 0.5 * rhs)


def u_tensor_solve(space: SpaceParams, m: MetricParams, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """U(X, Y) для произвольных p-векторов из определяющего тождества."""
    gram = associated_metric(space, m).sym
    table = get_algebra(space).pp_brackets[:, :, : space.d]
    # g([Z,X]_p, Y) + g(X, [Z,Y]_p) для Z = e_k
    rhs = np.einsum("kil,i,lj,j->k", table, x, gram, y) + np.einsum("i,il,kjl,j->k", x, gram, table, y)
    return _solve_gram(space, m, 0.5 * rhs)


def _u_rules(space: SpaceParams, m: MetricParams):
    """Ненулевые правила таблицы U: (индекс X, блок Y, коэффициент при U(X, Y_{2ν−1}))."""
    a, c = m.a, m.c
    shear = -a / c
    return [
        (space.x_index(1), 1, (2 - c) / (2 * c)),
        (space.x_index(1), 2, shear),
        (space.x_index(2), 1, shear),
        (space.x_index(2), 2, (a * a + c * c) / c - 0.5),
    ]


def u_closed_form_array(space: SpaceParams, m: MetricParams) -> np.ndarray:
    """
    Таблица U в замкнутой форме:
        U(X1, Y1_{2ν−1}) = (2−c)/(2c)·Y1_{2ν},        U(X1, Y1_{2ν}) = −(2−c)/(2c)·Y1_{2ν−1}
        U(X1, Y2_{2ν−1}) = −(a/c)·Y2_{2ν},            U(X1, Y2_{2ν}) = (a/c)·Y2_{2ν−1}
        U(X2, Y1_{2ν−1}) = −(a/c)·Y1_{2ν},            U(X2, Y1_{2ν}) = (a/c)·Y1_{2ν−1}
        U(X2, Y2_{2ν−1}) = ((a²+c²)/c − ½)·Y2_{2ν},   U(X2, Y2_{2ν}) = −((a²+c²)/c − ½)·Y2_{2ν−1}
    и U = 0 на остальных парах базисных векторов; продолжение симметричное.
    """
    u = np.zeros((space.d,) * 3)
    for x, block, coef in _u_rules(space, m):
        for nu in range(1, space.rank(block) + 1):
            odd, even = space.y_index(block, 2 * nu - 1), space.y_index(block, 2 * nu)
            u[x, odd, even] = u[odd, x, even] = coef
            u[x, even, odd] = u[even, x, odd] = -coef
    return u


def u_tensor_closed_form(space: SpaceParams, m: MetricParams, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return np.einsum("i,j,ijk->k", x, y, u_closed_form_array(space, m))


@lru_cache(maxsize=128)
def connection_table(space: SpaceParams, m: MetricParams) -> ConnectionTable:
    """Таблица D_{e_i} e_j; кешируется по (space, m)."""
    u = u_tensor_array(space, m)
    half_bracket = 0.5 * get_algebra(space).pp_brackets[:, :, : space.d]
    logger.debug("Связность для n=%d, p=%d, a=%g, c=%g", space.n, space.p, m.a, m.c)
    return ConnectionTable(_frozen(half_bracket + u), _frozen(u), space, m)


def nabla(space: SpaceParams, m: MetricParams, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """D_X Y = ½[X,Y]_p + U(X,Y)"""
    return connection_table(space, m).nabla(np.asarray(x, dtype=float), np.asarray(y, dtype=float))


def torsion_residual(table: ConnectionTable) -> float:
    """max |D_{e_i} e_j − D_{e_j} e_i − [e_i, e_j]_p|"""
    brackets = get_algebra(table.space).pp_brackets[:, :, : table.space.d]
    return max_abs(table.coeffs - table.coeffs.transpose(1, 0, 2) - brackets)


def metric_compatibility_residual(table: ConnectionTable) -> float:
    """max |g(D_{e_i} e_j, e_k) + g(e_j, D_{e_i} e_k)|"""
    lowered = np.einsum("ijl,lk->ijk", table.coeffs, table.gram)
    return max_abs(lowered + lowered.transpose(0, 2, 1))


def u_symmetry_residual(table: ConnectionTable) -> float:
    return max_abs(table.u - table.u.transpose(1, 0, 2))


def u_trace_vector(space: SpaceParams, m: MetricParams) -> np.ndarray:
    """Z = Σ_i U(Z_i, Z_i) по ортонормированному реперу."""
    frame = frame_matrix(space, m)
    u = connection_table(space, m).u
    return np.einsum("ai,bi,abk->k", frame, frame, u)
