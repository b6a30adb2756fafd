"""
Централизованная конфигурация для hermlab.
Все допуски, параметры подъёма и настройки запуска в одном месте.
"""
import os
from dataclasses import dataclass
from typing import Optional

from dotenv import load_dotenv

load_dotenv()


@dataclass(frozen=True)
class ToleranceConfig:
    """Допуски сравнения"""
    algebra: float = 1e-12
    structure: float = 1e-10
    connection: float = 1e-10
    ricci: float = 1e-8
    scalar: float = 1e-9
    hermitian: float = 1e-9
    einstein: float = 1e-9
    sectional: float = 1e-8
    curvature_identity: float = 1e-9
    positive_definite: float = 1e-12
    degenerate_plane: float = 1e-12
    gradient_rel: float = 1e-6
    critical_point: float = 1e-7
    hessian: float = 1e-6


@dataclass(frozen=True)
class AscentConfig:
    """Градиентный подъём и конечные разности"""
    start_a: float = 1.0
    start_c: float = 1.0
    step: float = 1.0
    armijo: float = 1e-4
    grad_tol: float = 1e-10
    max_iter: int = 100_000
    min_step: float = 1e-30
    fd_step: float = 1e-3
    fd_floor: float = 0.1
    hessian_step: float = 1e-4


@dataclass(frozen=True)
class RunConfigDefaults:
    """Значения по умолчанию для CLI"""
    samples: int = 10_000
    seed: int = 42
    tolerance: float = 1e-8
    output_format: str = "json"
    metrics_per_space: int = 20
    n_max: int = 3
    p_max: int = 3
    batch_size: int = 1000
    a_range: tuple = (-3.0, 3.0)
    c_range: tuple = (0.1, 5.0)
    scan_steps: int = 41
    verify_a_range: tuple = (-2.0, 2.0)
    verify_c_range: tuple = (0.25, 4.0)
    association_a_range: tuple = (-5.0, 5.0)
    association_c_range: tuple = (0.05, 10.0)
    gradient_points: int = 100
    maximality_points: int = 10_000
    hermitian_scan_points: int = 200


# Singleton экземпляры конфигураций
TOLERANCES = ToleranceConfig()
ASCENT = AscentConfig()
RUN = RunConfigDefaults()


# Команды CLI и их назначение
COMMAND_LABELS = {
    "verify": "Проверка всех инвариантов по сетке (n, p)",
    "report": "Кривизна Риччи и скалярная кривизна метрики g(a,c)",
    "optimize": "Критическая точка функционала скалярной кривизны",
    "sectional": "Секционная кривизна критической метрики",
    "scan": "Сетка значений s(a,c) для построения графиков",
}

OUTPUT_FORMATS = ("json", "csv")


def env_seed() -> Optional[int]:
    """
    Значение HERMLAB_SEED, если задано и является целым числом.

    Читается при каждом вызове, а не при импорте.
    """
    raw = os.getenv("HERMLAB_SEED", "").strip()
    if not raw:
        return None
    try:
        return int(raw)
    except ValueError:
        return None


def env_log_file() -> Optional[str]:
    """Путь к файлу лога из HERMLAB_LOG_FILE (или None)."""
    raw = os.getenv("HERMLAB_LOG_FILE", "").strip()
    return raw or None


def env_log_level() -> str:
    return os.getenv("HERMLAB_LOG_LEVEL", "WARNING").strip().upper() or "WARNING"


def validate_config() -> tuple[bool, Optional[str]]:
    """
    Проверяет согласованность настроек.

    Returns:
        tuple: (is_valid, error_message)
    """
    raw_seed = os.getenv("HERMLAB_SEED", "").strip()
    if raw_seed and env_seed() is None:
        return False, f"HERMLAB_SEED должен быть целым числом, получено: {raw_seed!r}"

    if RUN.output_format not in OUTPUT_FORMATS:
        return False, f"Неизвестный формат вывода: {RUN.output_format}"

    if not (0 < ASCENT.armijo < 1):
        return False, "Константа Армихо должна лежать в (0, 1)"

    return True, None


if __name__ == "__main__":
    # Тест конфигурации
    is_valid, error = validate_config()
    if is_valid:
        print("✅ Конфигурация валидна")
        print(f"Seed: {env_seed() if env_seed() is not None else RUN.seed}")
        print(f"Выборка плоскостей: {RUN.samples}")
        print(f"Допуск по умолчанию: {RUN.tolerance}")
    else:
        print(f"❌ Ошибка конфигурации: {error}")
