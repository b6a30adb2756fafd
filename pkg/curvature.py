"""
Кривизна метрик g(a,c).

Три независимых пути к тензору Риччи:
    - таблица в замкнутой форме;
    - квадратичная формула через скобки и ортонормированный репер;
    - след тензора Римана, построенного по структурным константам.
Плюс скалярная кривизна, собственные значения Риччи, проверка Эйнштейна,
секционная кривизна и режимы её оценок для критической метрики g(0, √(n/p)).
"""
import logging
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy import linalg

from algebra import ParameterError, SpaceParams, bracket, bracket_h, bracket_p, get_algebra, h_action
from config import RUN, TOLERANCES
from connection import connection_table, nabla, u_trace_vector
from structures import BilinearForm, MetricParams, associated_metric, complex_structure, frame_matrix, hermitian_residual
from utils import make_rng, max_abs

logger = logging.getLogger(__name__)


class DegeneratePlaneError(ValueError):
    """Векторы A, B не натягивают двумерную плоскость."""

    def __init__(self, message: str, denominator: float):
        super().__init__(message)
        self.denominator = denominator


@dataclass(frozen=True, eq=False)
class CurvatureReport:
    space: SpaceParams
    metric: MetricParams
    ricci: BilinearForm
    scalar_trace: float
    scalar_closed_form: float
    scalar_residual: float
    ricci_residual: float
    ricci_eigen_paper: List[float]
    ricci_operator_spectrum: List[float]
    einstein_constant: Optional[float]
    hermitian_ricci_residual: float

    def to_dict(self) -> dict:
        return {
            "n": self.space.n,
            "p": self.space.p,
            "a": self.metric.a,
            "c": self.metric.c,
            "ricci": self.ricci.sym,
            "scalar_trace": self.scalar_trace,
            "scalar_closed_form": self.scalar_closed_form,
            "scalar_residual": self.scalar_residual,
            "ricci_residual": self.ricci_residual,
            "ricci_eigen_paper": self.ricci_eigen_paper,
            "ricci_operator_spectrum": self.ricci_operator_spectrum,
            "einstein_constant": self.einstein_constant,
            "hermitian_ricci_residual": self.hermitian_ricci_residual,
        }


@dataclass(frozen=True)
class SectionalReport:
    n: int
    p: int
    c: float
    ratio: float
    regime: int
    bound_low: float
    bound_high: float
    observed_min: float
    observed_max: float
    argmin_bivector: str
    argmax_bivector: str
    samples_in_bounds: float
    samples: int
    seed: int
    named_min: float
    named_max: float
    bounds_achieved: bool
    named: Dict[str, List[float]] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


# --- Тензор Римана ---

@lru_cache(maxsize=64)
def riemann_tensor(space: SpaceParams, m: MetricParams) -> np.ndarray:
    """
    R[i, j, k, l]: l-я компонента R(e_i, e_j) e_k, где
    R(X,Y)W = D_X D_Y W − D_Y D_X W − D_{[X,Y]_p} W − [[X,Y]_h, W].
    """
    d = space.d
    algebra = get_algebra(space)
    table = connection_table(space, m).coeffs
    pp = algebra.pp_brackets
    hp = algebra.hp_brackets[:, :, :d]

    # Σ_m T[j,k,m] T[i,m,l] в порядке (i, j, k, l)
    second = np.tensordot(table, table, axes=([2], [1])).transpose(2, 0, 1, 3)
    along_p = np.tensordot(pp[:, :, :d], table, axes=([2], [0]))
    along_h = np.tensordot(pp[:, :, d:], hp, axes=([2], [0]))
    return _frozen(second - second.transpose(1, 0, 2, 3) - along_p - along_h)


def riemann(space: SpaceParams, m: MetricParams, x: np.ndarray, y: np.ndarray, w: np.ndarray) -> np.ndarray:
    """
    R(X,Y)W напрямую: ковариантные производные и матричный коммутатор
    h-компоненты [X,Y] с W.
    """
    x, y, w = (np.asarray(v, dtype=float) for v in (x, y, w))
    algebra = get_algebra(space)
    d = space.d

    first = nabla(space, m, x, nabla(space, m, y, w))
    second = nabla(space, m, y, nabla(space, m, x, w))
    third = nabla(space, m, bracket_p(space, x, y), w)

    h_coeffs = np.concatenate([np.zeros(d), bracket_h(space, x, y)])
    fourth = bracket(algebra.element(h_coeffs), algebra.p_element(w))
    return first - second - third - fourth.p_coeffs


def lowered_riemann(space: SpaceParams, m: MetricParams) -> np.ndarray:
    """Rl[i, j, k, l] = g(R(e_i, e_j) e_k, e_l)"""
    return np.tensordot(riemann_tensor(space, m), associated_metric(space, m).sym, axes=([3], [0]))


def curvature_identity_residuals(space: SpaceParams, m: MetricParams) -> Dict[str, float]:
    """Антисимметрия по (X,Y), парная симметрия и первое тождество Бьянки."""
    r = riemann_tensor(space, m)
    rl = lowered_riemann(space, m)
    bianchi = r + np.einsum("jkil->ijkl", r) + np.einsum("kijl->ijkl", r)
    return {
        "antisymmetry": max_abs(r + r.transpose(1, 0, 2, 3)),
        "pair_symmetry": max_abs(rl - rl.transpose(2, 3, 0, 1)),
        "bianchi": max_abs(bianchi),
    }


# --- Риччи ---

def ricci_from_riemann(space: SpaceParams, m: MetricParams) -> np.ndarray:
    """Ric(X,Y) = Σ_i g(R(Z_i, X) Y, Z_i) по ортонормированному реперу."""
    frame = frame_matrix(space, m)
    return np.einsum("ab,axyb->xy", frame @ frame.T, lowered_riemann(space, m))


def ricci_closed_form_matrix(space: SpaceParams, m: MetricParams) -> np.ndarray:
    n, p = space.n, space.p
    a, c = m.a, m.c
    x1, x2 = space.x_index(1), space.x_index(2)
    q = a * a + c * c

    ric = np.zeros((space.d, space.d))
    ric[x1, x1] = 2 * (n + p * a * a) / c ** 2
    ric[x2, x2] = 2 * (n * a * a + p * q * q) / c ** 2
    ric[x1, x2] = ric[x2, x1] = -2 * a / c ** 2 * (n + p * q)
    for i in range(1, 2 * n + 1):
        idx = space.y_index(1, i)
        ric[idx, idx] = 2 * (1 + n - 1 / c)
    for i in range(1, 2 * p + 1):
        idx = space.y_index(2, i)
        ric[idx, idx] = 2 * (1 + p - q / c)
    return ric


def ricci_closed_form(space: SpaceParams, m: MetricParams, u: str, v: str) -> float:
    """Значение таблицы Риччи на паре базисных векторов ("X1", "Y2_3", ...)."""
    algebra = get_algebra(space)
    i, j = algebra.index_of(u), algebra.index_of(v)
    if i >= space.d or j >= space.d:
        raise ParameterError(f"Ожидались векторы из p, получено {u!r}, {v!r}")
    return float(ricci_closed_form_matrix(space, m)[i, j])


def _ricci_quadratic(space: SpaceParams, m: MetricParams, x: np.ndarray) -> float:
    """
    Ric(X,X) = −½Σ|[X,Z_i]_p|² − ½Σ g([X,[X,Z_i]_p]_p, Z_i) − Σ g([X,[X,Z_i]_h]_p, Z_i)
               + ¼Σ_{i,j} g([Z_i,Z_j]_p, X)² − g([Z,X]_p, X)
    """
    gram = associated_metric(space, m).sym
    frame = frame_matrix(space, m)

    def g(u, v):
        return float(u @ gram @ v)

    total = 0.0
    for i in range(space.d):
        zi = frame[:, i]
        xz_p = bracket_p(space, x, zi)
        xz_h = bracket_h(space, x, zi)
        total -= 0.5 * g(xz_p, xz_p)
        total -= 0.5 * g(bracket_p(space, x, xz_p), zi)
        # [X, H] = −[H, X]
        total += g(h_action(space, xz_h, x), zi)
        for j in range(space.d):
            total += 0.25 * g(bracket_p(space, zi, frame[:, j]), x) ** 2
    trace = u_trace_vector(space, m)
    total -= g(bracket_p(space, trace, x), x)
    return total


def ricci_formula(space: SpaceParams, m: MetricParams, x: np.ndarray, y: Optional[np.ndarray] = None) -> float:
    """Квадратичная формула Риччи; для пары (X, Y) поляризация ½(Q(X+Y) − Q(X) − Q(Y))."""
    x = np.asarray(x, dtype=float)
    if y is None:
        return _ricci_quadratic(space, m, x)
    y = np.asarray(y, dtype=float)
    return 0.5 * (
        _ricci_quadratic(space, m, x + y) - _ricci_quadratic(space, m, x) - _ricci_quadratic(space, m, y)
    )


def ricci_formula_matrix(space: SpaceParams, m: MetricParams) -> np.ndarray:
    """Та же формула, поляризованная почленно на базисных парах."""
    d = space.d
    algebra = get_algebra(space)
    gram = associated_metric(space, m).sym
    frame = frame_matrix(space, m)
    pp_p = algebra.pp_brackets[:, :, :d]
    pp_h = algebra.pp_brackets[:, :, d:]
    hp = algebra.hp_brackets[:, :, :d]
    gf = gram @ frame

    # [e_s, Z_i]_p и [e_s, Z_i]_h
    adj_p = np.einsum("zi,szk->sik", frame, pp_p)
    adj_h = np.einsum("zi,sza->sia", frame, pp_h)

    first = -0.5 * np.einsum("sil,til->st", adj_p @ gram, adj_p)

    nested = np.einsum("tik,ski->st", adj_p, pp_p @ gf)
    second = -0.25 * (nested + nested.T)

    nested_h = -np.einsum("tia,asi->st", adj_h, hp @ gf)
    third = -0.5 * (nested_h + nested_h.T)

    pairs = np.einsum("yj,iyk->ijk", frame, np.einsum("zi,zyk->iyk", frame, pp_p)) @ gram
    fourth = 0.25 * np.einsum("ijs,ijt->st", pairs, pairs)

    shifted = np.einsum("z,zsk->sk", u_trace_vector(space, m), pp_p) @ gram
    fifth = -0.5 * (shifted + shifted.T)
    return first + second + third + fourth + fifth


def hermitian_ricci_residual(space: SpaceParams, m: MetricParams, ricci: Optional[np.ndarray] = None) -> float:
    """max |Ric(IX, IY) − Ric(X, Y)| по базисным парам."""
    if ricci is None:
        ricci = ricci_from_riemann(space, m)
    return hermitian_residual(ricci, complex_structure(space, m).mat)


# --- Скалярная кривизна, спектр, Эйнштейн ---

def scalar_closed_form(space: SpaceParams, m: MetricParams) -> float:
    """s = 4n(1 + n − 1/(2c)) + 4p(1 + p − (a² + c²)/(2c))"""
    n, p, a, c = space.n, space.p, m.a, m.c
    return 4 * n * (1 + n - 1 / (2 * c)) + 4 * p * (1 + p - (a * a + c * c) / (2 * c))


def scalar_curvature(space: SpaceParams, m: MetricParams) -> Tuple[float, float]:
    """(Ric_ij g^ij по тензору Римана, замкнутая формула)"""
    inverse = linalg.inv(associated_metric(space, m).sym)
    trace = float(np.sum(ricci_from_riemann(space, m) * inverse))
    return trace, scalar_closed_form(space, m)


def ricci_eigenvalues(space: SpaceParams, m: MetricParams) -> Tuple[List[float], List[float]]:
    """
    Returns:
        tuple: (значения по формуле с дискриминантом (x − y)² + 4z²,
                спектр оператора Риччи g⁻¹·Ric по возрастанию)
    """
    n, p, a, c = space.n, space.p, m.a, m.c
    q = a * a + c * c
    x = 2 * (n + p * a * a) / c ** 2
    y = 2 * (n * a * a + p * q * q) / c ** 2
    z = -2 * a / c ** 2 * (n + p * q)
    root = math.sqrt((x - y) ** 2 + 4 * z * z)
    closed = [(x + y + root) / 2, (x + y - root) / 2]
    closed += [2 * (1 + n - 1 / c)] * (2 * n)
    closed += [2 * (1 + p - q / c)] * (2 * p)

    ricci = ricci_from_riemann(space, m)
    spectrum = linalg.eigh(0.5 * (ricci + ricci.T), associated_metric(space, m).sym, eigvals_only=True)
    return closed, [float(v) for v in spectrum]


def einstein_check(space: SpaceParams, m: MetricParams, tol: float = TOLERANCES.einstein) -> Optional[float]:
    """λ, если Ric = λ·g поэлементно (λ = s/d), иначе None."""
    ricci = ricci_from_riemann(space, m)
    gram = associated_metric(space, m).sym
    lam = float(np.sum(ricci * linalg.inv(gram))) / space.d
    residual = max_abs(ricci - lam * gram)
    if residual > tol:
        logger.debug("Не эйнштейнова: max|Ric − λg| = %.3e при λ = %.6g", residual, lam)
        return None
    return lam


def curvature_report(space: SpaceParams, m: MetricParams) -> CurvatureReport:
    ricci = ricci_from_riemann(space, m)
    trace, closed = scalar_curvature(space, m)
    eigen, spectrum = ricci_eigenvalues(space, m)
    return CurvatureReport(
        space=space,
        metric=m,
        ricci=BilinearForm(ricci, "ricci"),
        scalar_trace=trace,
        scalar_closed_form=closed,
        scalar_residual=abs(trace - closed),
        ricci_residual=max_abs(ricci - ricci_closed_form_matrix(space, m)),
        ricci_eigen_paper=eigen,
        ricci_operator_spectrum=spectrum,
        einstein_constant=einstein_check(space, m),
        hermitian_ricci_residual=hermitian_ricci_residual(space, m, ricci),
    )


# --- Секционная кривизна ---

def sectional(space: SpaceParams, m: MetricParams, a: np.ndarray, b: np.ndarray,
              tol: float = TOLERANCES.degenerate_plane) -> float:
    """K(A,B) = g(R(A,B)B, A) / (|A|²|B|² − g(A,B)²)"""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    gram = associated_metric(space, m).sym
    denominator = (a @ gram @ a) * (b @ gram @ b) - (a @ gram @ b) ** 2
    if denominator < tol:
        raise DegeneratePlaneError(f"Вырожденная плоскость: знаменатель {denominator:.3e}", denominator)
    numerator = np.einsum("ijkl,i,j,k,l->", lowered_riemann(space, m), a, b, b, a)
    return float(numerator / denominator)


def classify_regime(n: int, p: int) -> int:
    """1: n/p ≤ 1/9; 2: 1/9 < n/p ≤ 9/16; 3: 9/16 < n/p ≤ 1."""
    _check_sectional_space(SpaceParams(n, p))
    ratio = Fraction(n, p)
    if ratio <= Fraction(1, 9):
        return 1
    if ratio <= Fraction(9, 16):
        return 2
    return 3


def regime_bounds(n: int, p: int) -> Tuple[float, float]:
    regime = classify_regime(n, p)
    if regime == 1:
        return 4 - 3 * math.sqrt(p / n), math.sqrt(p / n)
    if regime == 2:
        return 4 - 3 * math.sqrt(p / n), 4 - 3 * math.sqrt(n / p)
    return 0.0, 4 - 3 * math.sqrt(n / p)


def _check_sectional_space(space: SpaceParams) -> None:
    if space.n == 0:
        raise ParameterError("Оценки секционной кривизны определены только при n ≥ 1")
    if space.n > space.p:
        raise ParameterError(f"Требуется n ≤ p, получено n={space.n}, p={space.p}")


def named_bivectors(space: SpaceParams, c: float) -> List[Tuple[str, List[Tuple[np.ndarray, np.ndarray]]]]:
    """Семейства выделенных бивекторов в фиксированном порядке."""
    d = space.d

    def unit(idx: int) -> np.ndarray:
        vec = np.zeros(d)
        vec[idx] = 1.0
        return vec

    x1, x2 = unit(space.x_index(1)), unit(space.x_index(2))
    y1 = [unit(space.y_index(1, i)) for i in range(1, 2 * space.n + 1)]
    y2 = [unit(space.y_index(2, i)) for i in range(1, 2 * space.p + 1)]
    return [
        ("Y1_odd^Y1_even", [(y1[2 * l], y1[2 * l + 1]) for l in range(space.n)]),
        ("sqrt(c)X1^Y1_i", [(math.sqrt(c) * x1, y) for y in y1]),
        ("Y2_odd^Y2_even", [(y2[2 * k], y2[2 * k + 1]) for k in range(space.p)]),
        ("X1^X2", [(x1, x2)]),
        ("Y1_odd^Y2_odd", [(y1[2 * l], y2[2 * k]) for l in range(space.n) for k in range(space.p)]),
        ("Y1_even^Y2_even", [(y1[2 * l + 1], y2[2 * k + 1]) for l in range(space.n) for k in range(space.p)]),
    ]


def _in_frame(tensor: np.ndarray, frame: np.ndarray) -> np.ndarray:
    """Компоненты 4-тензора в репере (столбцы frame)."""
    for axis in range(4):
        tensor = np.moveaxis(np.tensordot(tensor, frame, axes=([axis], [0])), -1, axis)
    return tensor


def sectional_extremes(
    space: SpaceParams,
    samples: int = RUN.samples,
    seed: int = RUN.seed,
    tol: float = TOLERANCES.sectional,
    batch_size: int = RUN.batch_size,
) -> SectionalReport:
    """
    Секционная кривизна критической метрики g(0, √(n/p)) на выделенных
    бивекторах и на `samples` случайных плоскостях.

    Плоскости: два вектора со стандартными нормальными координатами
    в ортонормированном репере, генератор с зерном seed.
    """
    _check_sectional_space(space)
    n, p = space.n, space.p
    c = math.sqrt(n / p)
    m = MetricParams(0.0, c)
    regime = classify_regime(n, p)
    low, high = regime_bounds(n, p)
    d = space.d

    named: Dict[str, List[float]] = {}
    for label, planes in named_bivectors(space, c):
        values = [sectional(space, m, a, b) for a, b in planes]
        if values:
            named[label] = [min(values), max(values)]
    named_min = min(v[0] for v in named.values())
    named_max = max(v[1] for v in named.values())
    argmin = next(label for label, v in named.items() if v[0] <= named_min + tol)
    argmax = next(label for label, v in named.items() if v[1] >= named_max - tol)

    # Числитель как билинейная форма на (A⊗A, B⊗B)
    lowered = _in_frame(lowered_riemann(space, m), frame_matrix(space, m))
    kernel = lowered.transpose(0, 3, 1, 2).reshape(d * d, d * d)

    rng = make_rng(seed)
    sample_min, sample_max = math.inf, -math.inf
    inside = 0
    for start in range(0, samples, batch_size):
        size = min(batch_size, samples - start)
        a = rng.standard_normal((size, d))
        b = rng.standard_normal((size, d))
        aa = np.einsum("si,sl->sil", a, a).reshape(size, -1)
        bb = np.einsum("sj,sk->sjk", b, b).reshape(size, -1)
        numerator = np.sum((aa @ kernel) * bb, axis=1)
        dot = np.einsum("si,si->s", a, b)
        denominator = np.einsum("si,si->s", a, a) * np.einsum("si,si->s", b, b) - dot * dot
        values = numerator / denominator
        sample_min = min(sample_min, float(values.min()))
        sample_max = max(sample_max, float(values.max()))
        inside += int(np.count_nonzero((values >= low - tol) & (values <= high + tol)))

    observed_min = min(named_min, sample_min)
    observed_max = max(named_max, sample_max)
    report = SectionalReport(
        n=n,
        p=p,
        c=c,
        ratio=n / p,
        regime=regime,
        bound_low=low,
        bound_high=high,
        observed_min=observed_min,
        observed_max=observed_max,
        argmin_bivector=argmin if named_min <= sample_min + tol else "random",
        argmax_bivector=argmax if named_max >= sample_max - tol else "random",
        samples_in_bounds=inside / samples if samples else 1.0,
        samples=samples,
        seed=seed,
        named_min=named_min,
        named_max=named_max,
        bounds_achieved=abs(named_min - low) <= tol and abs(named_max - high) <= tol,
        named=named,
    )
    logger.info("Режим %d для n=%d, p=%d: K ∈ [%.6g, %.6g], доля в границах %.4f",
                regime, n, p, observed_min, observed_max, report.samples_in_bounds)
    return report
