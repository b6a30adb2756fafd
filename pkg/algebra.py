"""
Алгебра Ли g = u(n+1) ⊕ u(p+1) в матричной реализации.

Базис, редуктивное разложение g = h ⊕ p, скобки и проекции.
Элементы хранятся как вещественные коэффициенты по фиксированному набору
косоэрмитовых образующих; скобка считается как коммутатор блочных матриц
и раскладывается обратно решением системы по образующим.

Нумерация p-базиса (d = 2n + 2p + 2):
    0            X1
    1..2n        Y1_1 .. Y1_2n
    2n+1         X2
    2n+2..d-1    Y2_1 .. Y2_2p
Далее идут образующие h1, затем h2.
"""
import logging
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Dict, List, Sequence, Tuple

import numpy as np

from config import TOLERANCES

logger = logging.getLogger(__name__)


class ParameterError(ValueError):
    """Недопустимые параметры однородного пространства (или несовместимые пространства)."""


@dataclass(frozen=True)
class SpaceParams:
    """Пространство S^{2n+1} × S^{2p+1} = U(n+1)/U(n) × U(p+1)/U(p)"""
    n: int
    p: int

    def __post_init__(self):
        for name in ("n", "p"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
                raise ParameterError(f"{name} должно быть целым числом, получено {value!r}")
            if value < 0:
                raise ParameterError(f"{name} должно быть неотрицательным, получено {value}")
            object.__setattr__(self, name, int(value))
        if self.n + self.p < 1:
            raise ParameterError("n и p не могут одновременно равняться нулю")

    def p_dimension(self) -> int:
        return 2 * self.n + 2 * self.p + 2

    @property
    def d(self) -> int:
        return self.p_dimension()

    def rank(self, block: int) -> int:
        """n для первого сомножителя, p для второго."""
        return self.n if block == 1 else self.p

    def x_index(self, block: int) -> int:
        return 0 if block == 1 else 2 * self.n + 1

    def y_index(self, block: int, i: int) -> int:
        """Позиция Y^block_i (i с единицы) в p-базисе."""
        if not 1 <= i <= 2 * self.rank(block):
            raise ParameterError(f"Y{block}_{i} вне диапазона 1..{2 * self.rank(block)}")
        return self.x_index(block) + i


@dataclass(frozen=True)
class BasisVector:
    """
    Символьная метка одной образующей u(n+1) ⊕ u(p+1).

    tag: "X1" | "Y1" | "X2" | "Y2" | "H1" | "H2"
    i: номер Y (с единицы), kind/nu/mu: вид и индексы образующей h
    """
    tag: str
    index: int
    i: int = 0
    kind: str = ""
    nu: int = 0
    mu: int = 0

    @property
    def block(self) -> int:
        return int(self.tag[1])

    @property
    def in_p(self) -> bool:
        return self.tag[0] != "H"

    @property
    def label(self) -> str:
        if self.tag[0] == "X":
            return self.tag
        if self.tag[0] == "Y":
            return f"{self.tag}_{self.i}"
        return f"{self.tag}[{self.kind} {self.nu},{self.mu}]"


def _unit(size: int, row: int, col: int) -> np.ndarray:
    m = np.zeros((size, size), dtype=complex)
    m[row, col] = 1.0
    return m


def _z(size: int, nu: int, mu: int) -> np.ndarray:
    """Z_{νμ} = E_{νμ} − E_{μν}"""
    return _unit(size, nu, mu) - _unit(size, mu, nu)


def _t(size: int, nu: int, mu: int) -> np.ndarray:
    """T_{νμ} = E_{νμ} + E_{μν} (T_{νν} = 2E_{νν})"""
    return _unit(size, nu, mu) + _unit(size, mu, nu)


def generator_matrix(vector: BasisVector, size: int) -> np.ndarray:
    """
    Матрица образующей в своём блоке.

    X = ½·i·T_00, Y_{2ν−1} = Z_{ν0}, Y_{2ν} = i·T_{ν0};
    h: Z_{νμ}, i·T_{νμ} (1 ≤ μ < ν) и i·T_{νν}.
    """
    if vector.tag[0] == "X":
        return 0.5j * _t(size, 0, 0)
    if vector.tag[0] == "Y":
        nu = (vector.i + 1) // 2
        if vector.i % 2 == 1:
            return _z(size, nu, 0)
        return 1j * _t(size, nu, 0)
    if vector.kind == "Z":
        return _z(size, vector.nu, vector.mu)
    return 1j * _t(size, vector.nu, vector.mu)


def _enumerate_basis(space: SpaceParams) -> List[BasisVector]:
    basis: List[BasisVector] = []

    def add(**kwargs):
        basis.append(BasisVector(index=len(basis), **kwargs))

    # p-часть в фиксированном порядке
    for block in (1, 2):
        add(tag=f"X{block}")
        for i in range(1, 2 * space.rank(block) + 1):
            add(tag=f"Y{block}", i=i)

    # h-часть: вложение u(n) в правый нижний угол
    for block in (1, 2):
        for nu in range(1, space.rank(block) + 1):
            add(tag=f"H{block}", kind="iT", nu=nu, mu=nu)
            for mu in range(1, nu):
                add(tag=f"H{block}", kind="Z", nu=nu, mu=mu)
                add(tag=f"H{block}", kind="iT", nu=nu, mu=mu)
    return basis


def _flatten(block1: np.ndarray, block2: np.ndarray) -> np.ndarray:
    """Вещественный вектор (Re, Im обоих блоков); работает и для стопок матриц."""
    lead = block1.shape[:-2]
    parts = [
        block1.real.reshape(lead + (-1,)),
        block1.imag.reshape(lead + (-1,)),
        block2.real.reshape(lead + (-1,)),
        block2.imag.reshape(lead + (-1,)),
    ]
    return np.concatenate(parts, axis=-1)


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


class ReductiveAlgebra:
    """
    Матричная реализация g = h ⊕ p для заданных (n, p).

    Все массивы только для чтения; таблицы структурных констант
    вычисляются из коммутаторов при первом обращении.
    """

    def __init__(self, space: SpaceParams):
        self.space = space
        self.basis: Tuple[BasisVector, ...] = tuple(_enumerate_basis(space))
        self.d = space.p_dimension()
        self.dim = len(self.basis)
        self.sizes = (space.n + 1, space.p + 1)

        gens1 = np.zeros((self.dim,) + (self.sizes[0],) * 2, dtype=complex)
        gens2 = np.zeros((self.dim,) + (self.sizes[1],) * 2, dtype=complex)
        for vector in self.basis:
            target = gens1 if vector.block == 1 else gens2
            target[vector.index] = generator_matrix(vector, self.sizes[vector.block - 1])
        self.generators = (_frozen(gens1), _frozen(gens2))

        self._flat = _flatten(gens1, gens2)
        self._gram = self._flat @ self._flat.T
        self._labels: Dict[str, int] = {v.label: v.index for v in self.basis}
        logger.debug("Алгебра для n=%d, p=%d: dim g = %d, dim p = %d",
                     space.n, space.p, self.dim, self.d)

    @property
    def dim_h(self) -> int:
        return self.dim - self.d

    def index_of(self, label: str) -> int:
        try:
            return self._labels[label]
        except KeyError:
            raise ParameterError(f"Нет образующей '{label}' для n={self.space.n}, p={self.space.p}") from None

    def labels(self) -> List[str]:
        return [v.label for v in self.basis]

    def coefficients(self, block1: np.ndarray, block2: np.ndarray) -> np.ndarray:
        """Коэффициенты по образующим (решение по матрице Грама образующих)."""
        rhs = _flatten(np.asarray(block1, dtype=complex), np.asarray(block2, dtype=complex)) @ self._flat.T
        lead = rhs.shape[:-1]
        solved = np.linalg.solve(self._gram, rhs.reshape(-1, self.dim).T).T
        return solved.reshape(lead + (self.dim,))

    def blocks_of(self, coeffs: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        coeffs = np.asarray(coeffs, dtype=float)
        return (
            np.einsum("a,aij->ij", coeffs, self.generators[0]),
            np.einsum("a,aij->ij", coeffs, self.generators[1]),
        )

    def element(self, coeffs: Sequence[float]) -> "AlgebraElement":
        coeffs = np.array(coeffs, dtype=float)
        if coeffs.shape != (self.dim,):
            raise ParameterError(f"Ожидалось {self.dim} коэффициентов, получено {coeffs.shape}")
        block1, block2 = self.blocks_of(coeffs)
        return AlgebraElement(self.space, _frozen(coeffs), (_frozen(block1), _frozen(block2)))

    def p_element(self, p_coeffs: Sequence[float]) -> "AlgebraElement":
        """Вложение вектора из p (d коэффициентов) в g."""
        p_coeffs = np.asarray(p_coeffs, dtype=float)
        if p_coeffs.shape != (self.d,):
            raise ParameterError(f"Ожидалось {self.d} коэффициентов p, получено {p_coeffs.shape}")
        coeffs = np.zeros(self.dim)
        coeffs[: self.d] = p_coeffs
        return self.element(coeffs)

    def vector(self, label: str) -> "AlgebraElement":
        coeffs = np.zeros(self.dim)
        coeffs[self.index_of(label)] = 1.0
        return self.element(coeffs)

    def from_blocks(self, block1: np.ndarray, block2: np.ndarray) -> "AlgebraElement":
        """Элемент по паре блоков; блоки должны быть косоэрмитовыми."""
        block1 = np.array(block1, dtype=complex)
        block2 = np.array(block2, dtype=complex)
        if block1.shape != (self.sizes[0],) * 2 or block2.shape != (self.sizes[1],) * 2:
            raise ParameterError(
                f"Размеры блоков {block1.shape}, {block2.shape} не совпадают с {self.sizes}"
            )
        scale = max(1.0, np.abs(block1).max(initial=0.0), np.abs(block2).max(initial=0.0))
        skew = max(np.abs(block1 + block1.conj().T).max(initial=0.0),
                   np.abs(block2 + block2.conj().T).max(initial=0.0))
        if skew > 1e-9 * scale:
            raise ValueError(f"Блоки не косоэрмитовы (невязка {skew:.3e}), элемент не лежит в u(n+1)⊕u(p+1)")
        coeffs = self.coefficients(block1, block2)
        return AlgebraElement(self.space, _frozen(coeffs), (_frozen(block1), _frozen(block2)))

    def _bracket_table(self, left: np.ndarray, right: np.ndarray) -> np.ndarray:
        """Коэффициенты [e_a, e_b] для a из left, b из right: массив (len(left), len(right), dim)."""
        tables = []
        for gens in self.generators:
            lhs, rhs = gens[left], gens[right]
            tables.append(
                np.einsum("aij,bjk->abik", lhs, rhs) - np.einsum("bij,ajk->abik", rhs, lhs)
            )
        return self.coefficients(tables[0], tables[1])

    @cached_property
    def pp_brackets(self) -> np.ndarray:
        """[e_i, e_j] для i, j из p: коэффициенты по всему базису g, форма (d, d, dim)."""
        idx = np.arange(self.d)
        return _frozen(self._bracket_table(idx, idx))

    @cached_property
    def hp_brackets(self) -> np.ndarray:
        """[H_a, e_k] для H_a из h, e_k из p: форма (dim_h, d, dim)."""
        return _frozen(self._bracket_table(np.arange(self.d, self.dim), np.arange(self.d)))


@dataclass(frozen=True, eq=False)
class AlgebraElement:
    """Элемент g: коэффициенты по всему базису и пара блочных матриц."""
    space: SpaceParams
    coeffs: np.ndarray
    blocks: Tuple[np.ndarray, np.ndarray]

    @property
    def algebra(self) -> ReductiveAlgebra:
        return get_algebra(self.space)

    @property
    def p_coeffs(self) -> np.ndarray:
        return self.coeffs[: self.space.d]

    @property
    def h_coeffs(self) -> np.ndarray:
        return self.coeffs[self.space.d:]

    def _check(self, other: "AlgebraElement") -> None:
        if not isinstance(other, AlgebraElement) or other.space != self.space:
            raise ParameterError("Элементы относятся к разным алгебрам")

    def __add__(self, other: "AlgebraElement") -> "AlgebraElement":
        self._check(other)
        return self.algebra.element(self.coeffs + other.coeffs)

    def __sub__(self, other: "AlgebraElement") -> "AlgebraElement":
        self._check(other)
        return self.algebra.element(self.coeffs - other.coeffs)

    def __mul__(self, scalar: float) -> "AlgebraElement":
        return self.algebra.element(float(scalar) * self.coeffs)

    __rmul__ = __mul__

    def __neg__(self) -> "AlgebraElement":
        return self * -1.0

    def allclose(self, other: "AlgebraElement", tol: float = TOLERANCES.algebra) -> bool:
        self._check(other)
        return float(np.max(np.abs(self.coeffs - other.coeffs))) <= tol

    def is_zero(self, tol: float = TOLERANCES.algebra) -> bool:
        return float(np.max(np.abs(self.coeffs))) <= tol


@lru_cache(maxsize=32)
def get_algebra(space: SpaceParams) -> ReductiveAlgebra:
    """Грузим один раз на пространство."""
    return ReductiveAlgebra(space)


def build_basis(space: SpaceParams) -> List[Tuple[BasisVector, AlgebraElement]]:
    """
    Полный базис g: сначала p-часть (d элементов), затем h.

    Returns:
        list: пары (BasisVector, AlgebraElement); BasisVector.in_p отмечает p-часть
    """
    algebra = get_algebra(space)
    return [(vector, algebra.vector(vector.label)) for vector in algebra.basis]


def basis_labels(space: SpaceParams) -> List[str]:
    return get_algebra(space).labels()


def index_of(space: SpaceParams, label: str) -> int:
    return get_algebra(space).index_of(label)


def p_unit(space: SpaceParams, label: str) -> np.ndarray:
    """Координатный вектор p-базиса по метке ("X1", "Y2_3", ...)."""
    idx = index_of(space, label)
    if idx >= space.d:
        raise ParameterError(f"'{label}' не лежит в p")
    vec = np.zeros(space.d)
    vec[idx] = 1.0
    return vec


def bracket(a: AlgebraElement, b: AlgebraElement) -> AlgebraElement:
    """Поблочный коммутатор [A, B] = AB − BA, разложенный по образующим."""
    if a.space != b.space:
        raise ParameterError(
            f"Несовпадение размерностей: (n={a.space.n}, p={a.space.p}) и (n={b.space.n}, p={b.space.p})"
        )
    blocks = tuple(x @ y - y @ x for x, y in zip(a.blocks, b.blocks))
    return a.algebra.from_blocks(*blocks)


def project_p(a: AlgebraElement) -> AlgebraElement:
    coeffs = np.array(a.coeffs)
    coeffs[a.space.d:] = 0.0
    return a.algebra.element(coeffs)


def project_h(a: AlgebraElement) -> AlgebraElement:
    coeffs = np.array(a.coeffs)
    coeffs[: a.space.d] = 0.0
    return a.algebra.element(coeffs)


def bracket_p(space: SpaceParams, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """[X, Y]_p для векторов p, заданных коэффициентами."""
    table = get_algebra(space).pp_brackets
    return np.einsum("i,j,ijk->k", x, y, table[:, :, : space.d])


def bracket_h(space: SpaceParams, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """[X, Y]_h: коэффициенты по образующим h."""
    table = get_algebra(space).pp_brackets
    return np.einsum("i,j,ijk->k", x, y, table[:, :, space.d:])


def h_action(space: SpaceParams, h: np.ndarray, w: np.ndarray) -> np.ndarray:
    """[H, W] для H из h (коэффициенты h) и W из p; по редуктивности результат в p."""
    table = get_algebra(space).hp_brackets
    return np.einsum("a,k,akl->l", h, w, table[:, :, : space.d])


def reductivity_residual(space: SpaceParams) -> float:
    """Максимум |[H, P]_h| по базисным парам; ноль означает [h, p] ⊆ p."""
    table = get_algebra(space).hp_brackets
    if table.size == 0:
        return 0.0
    return float(np.max(np.abs(table[:, :, space.d:])))
