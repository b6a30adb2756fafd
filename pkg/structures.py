"""
Инвариантные структуры на p: 2-форма ω, комплексные структуры I(a,c),
ассоциированные метрики g(a,c), ортонормированные реперы и проверки
эрмитовости / интегрируемости.

Все тензоры заданы своими матрицами в p-базисе (см. algebra.py).
Для эндоморфизма: I e_j = Σ_k mat[k, j] e_k.
"""
import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Union

import numpy as np

from algebra import AlgebraElement, ParameterError, SpaceParams, bracket_p, get_algebra
from config import TOLERANCES
from utils import max_abs

logger = logging.getLogger(__name__)


class MetricParamsError(ParameterError):
    """Недопустимые параметры (a, c) метрики."""


@dataclass(frozen=True)
class MetricParams:
    """Параметры семейства I(a,c) / g(a,c), c > 0"""
    a: float
    c: float

    def __post_init__(self):
        for name in ("a", "c"):
            value = getattr(self, name)
            try:
                value = float(value)
            except (TypeError, ValueError):
                raise MetricParamsError(f"{name} должно быть числом, получено {value!r}") from None
            if not math.isfinite(value):
                raise MetricParamsError(f"{name} должно быть конечным, получено {value}")
            object.__setattr__(self, name, value)
        if self.c <= 0:
            raise MetricParamsError(f"Параметр c должен быть положительным, получено c={self.c}")


@dataclass(frozen=True, eq=False)
class TwoForm:
    skew: np.ndarray

    def __call__(self, x: np.ndarray, y: np.ndarray) -> float:
        return float(x @ self.skew @ y)

    def rank(self) -> int:
        return int(np.linalg.matrix_rank(self.skew))


@dataclass(frozen=True, eq=False)
class BilinearForm:
    """Симметричная форма на p; provenance: MetricParams или метка ("ricci", ...)."""
    sym: np.ndarray
    provenance: Union[MetricParams, str]

    def __call__(self, x: np.ndarray, y: np.ndarray) -> float:
        return float(x @ self.sym @ y)

    def symmetry_residual(self) -> float:
        return max_abs(self.sym - self.sym.T)

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(0.5 * (self.sym + self.sym.T)).min())


@dataclass(frozen=True, eq=False)
class EndomorphismField:
    mat: np.ndarray

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self.mat @ x

    def square_residual(self) -> float:
        """max |I² + Id|"""
        return max_abs(self.mat @ self.mat + np.eye(self.mat.shape[0]))


@dataclass(frozen=True)
class CompatibilityReport:
    compatible: bool
    positive: bool
    compatibility_residual: float
    min_eigenvalue: float


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


def _y_pairs(space: SpaceParams):
    """Пары индексов (Y_{2ν−1}, Y_{2ν}) обоих сомножителей."""
    for block in (1, 2):
        for nu in range(1, space.rank(block) + 1):
            yield space.y_index(block, 2 * nu - 1), space.y_index(block, 2 * nu)


def omega(space: SpaceParams) -> TwoForm:
    """ω = X1∧X2 + Σ Y1_{2ν−1}∧Y1_{2ν} + Σ Y2_{2μ−1}∧Y2_{2μ}"""
    skew = np.zeros((space.d, space.d))
    pairs = [(space.x_index(1), space.x_index(2))] + list(_y_pairs(space))
    for i, j in pairs:
        skew[i, j] = 1.0
        skew[j, i] = -1.0
    return TwoForm(_frozen(skew))


def complex_structure(space: SpaceParams, m: MetricParams) -> EndomorphismField:
    """
    I(a,c) на p-базисе:
        I X1 = (a/c) X1 + (1/c) X2
        I X2 = −((a²+c²)/c) X1 − (a/c) X2
        I Y_{2ν−1} = Y_{2ν},  I Y_{2ν} = −Y_{2ν−1}
    """
    a, c = m.a, m.c
    x1, x2 = space.x_index(1), space.x_index(2)
    mat = np.zeros((space.d, space.d))
    mat[x1, x1] = a / c
    mat[x2, x1] = 1.0 / c
    mat[x1, x2] = -(a * a + c * c) / c
    mat[x2, x2] = -a / c
    for odd, even in _y_pairs(space):
        mat[even, odd] = 1.0
        mat[odd, even] = -1.0
    return EndomorphismField(_frozen(mat))


def faulty_structure(space: SpaceParams, m: MetricParams) -> EndomorphismField:
    """
    Контрольная структура I′ с I′Y_1 = −Y_2, I′Y_2 = Y_1 на первой паре Y.

    I′² = −Id сохраняется, положительность нарушается.
    """
    block = 1 if space.n >= 1 else 2
    odd, even = space.y_index(block, 1), space.y_index(block, 2)
    mat = np.array(complex_structure(space, m).mat)
    mat[even, odd] = -1.0
    mat[odd, even] = 1.0
    return EndomorphismField(_frozen(mat))


def associated_metric(space: SpaceParams, m: MetricParams) -> BilinearForm:
    """g(a,c)(X, Y) = ω(X, I(a,c) Y), т.е. матрица Ω·I."""
    sym = omega(space).skew @ complex_structure(space, m).mat
    return BilinearForm(_frozen(sym), m)


def metric_table(space: SpaceParams, m: MetricParams) -> BilinearForm:
    """Явная таблица g(a,c): 1/c, (a²+c²)/c, −a/c на X; единицы на Y."""
    a, c = m.a, m.c
    x1, x2 = space.x_index(1), space.x_index(2)
    sym = np.eye(space.d)
    sym[x1, x1] = 1.0 / c
    sym[x2, x2] = (a * a + c * c) / c
    sym[x1, x2] = sym[x2, x1] = -a / c
    return BilinearForm(_frozen(sym), m)


def hermitian_residual(form: np.ndarray, structure: np.ndarray) -> float:
    """max |B(IX, IY) − B(X, Y)| по базисным парам."""
    return max_abs(structure.T @ form @ structure - form)


def hermitian_metric_residual(space: SpaceParams, m: MetricParams) -> float:
    return hermitian_residual(associated_metric(space, m).sym, complex_structure(space, m).mat)


def positivity_and_compatibility_check(
    space: SpaceParams,
    m: MetricParams,
    structure: Optional[EndomorphismField] = None,
    tol: float = TOLERANCES.structure,
) -> CompatibilityReport:
    """
    Определение положительной ассоциированности:
    ω(IX, IY) = ω(X, Y) и форма (X, Y) ↦ ω(X, IY) положительно определена.

    Args:
        structure: проверяемая структура (по умолчанию I(a,c))
    """
    if structure is None:
        structure = complex_structure(space, m)
    skew = omega(space).skew
    mat = structure.mat

    compat_residual = max_abs(mat.T @ skew @ mat - skew)
    form = skew @ mat
    min_eig = float(np.linalg.eigvalsh(0.5 * (form + form.T)).min())

    report = CompatibilityReport(
        compatible=compat_residual <= tol,
        positive=min_eig > TOLERANCES.positive_definite,
        compatibility_residual=compat_residual,
        min_eigenvalue=min_eig,
    )
    if not report.positive:
        logger.info("Структура не положительна: минимальное собственное значение %.3e", min_eig)
    return report


def frame_matrix(space: SpaceParams, m: MetricParams) -> np.ndarray:
    """
    Ортонормированный репер g(a,c) по столбцам:
    Z0 = √c·X1, Z_i = Y1_i, Z_{2n+1} = (a/√c)X1 + (1/√c)X2, Z_{2n+1+i} = Y2_i.
    """
    x1, x2 = space.x_index(1), space.x_index(2)
    root = math.sqrt(m.c)
    frame = np.eye(space.d)
    frame[x1, x1] = root
    frame[:, x2] = 0.0
    frame[x1, x2] = m.a / root
    frame[x2, x2] = 1.0 / root
    return _frozen(frame)


def orthonormal_frame(space: SpaceParams, m: MetricParams) -> List[AlgebraElement]:
    algebra = get_algebra(space)
    frame = frame_matrix(space, m)
    return [algebra.p_element(frame[:, i]) for i in range(space.d)]


def nijenhuis_p(space: SpaceParams, m: MetricParams, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """N(A,B) = [IA,IB]_p − [A,B]_p − I[IA,B]_p − I[A,IB]_p"""
    mat = complex_structure(space, m).mat
    ia, ib = mat @ a, mat @ b
    return (
        bracket_p(space, ia, ib)
        - bracket_p(space, a, b)
        - mat @ bracket_p(space, ia, b)
        - mat @ bracket_p(space, a, ib)
    )


def nijenhuis_residual(space: SpaceParams, m: MetricParams) -> float:
    """max |N(e_i, e_j)| по всем парам p-базиса."""
    mat = complex_structure(space, m).mat
    table = get_algebra(space).pp_brackets[:, :, : space.d]
    both = np.einsum("ai,bj,abk->ijk", mat, mat, table)
    left = np.einsum("ai,ajk,lk->ijl", mat, table, mat)
    right = np.einsum("bj,ibk,lk->ijl", mat, table, mat)
    return max_abs(both - table - left - right)


def omega_differential(space: SpaceParams, x: np.ndarray, y: np.ndarray, z: np.ndarray) -> float:
    """dω(X,Y,Z) = −ω([X,Y]_p, Z) + ω([X,Z]_p, Y) − ω([Y,Z]_p, X)"""
    form = omega(space)
    return (
        -form(bracket_p(space, x, y), z)
        + form(bracket_p(space, x, z), y)
        - form(bracket_p(space, y, z), x)
    )


def kahler_defect(space: SpaceParams) -> float:
    """max |dω| по базисным тройкам; для всех допустимых (n, p) строго положителен."""
    skew = omega(space).skew
    table = get_algebra(space).pp_brackets[:, :, : space.d]
    pairing = np.einsum("ijl,lk->ijk", table, skew)
    d_omega = -pairing + np.einsum("ikj->ijk", pairing) - np.einsum("jki->ijk", pairing)
    return max_abs(d_omega)
