"""
Утилиты общего назначения для hermlab.
Функции для форматирования чисел, сериализации, логирования и невязок.
"""
import json
import logging
import math
import re
from pathlib import Path
from typing import Any, Optional

import numpy as np

LOG_FORMAT = "[%(levelname)s] %(message)s"
FILE_LOG_FORMAT = "%(asctime)s | %(name)s | [%(levelname)s] %(message)s"


def format_float(value: float, digits: int = 17) -> str:
    """
    Форматирование числа с фиксированным числом значащих цифр.

    Args:
        value: Число
        digits: Число значащих цифр

    Returns:
        str: Строка, которая при обратном чтении даёт то же самое число

    Examples:
        >>> format_float(0.5)
        '0.5'
        >>> format_float(0.1)
        '0.10000000000000001'
        >>> format_float(80.0)
        '80'
    """
    return f"{float(value):.{digits}g}"


# Метка числа, уже записанного format_float; снимается после json.dumps
_FLOAT_MARK = "\x00f:"
_FLOAT_TOKEN = re.compile(r'"\\u0000f:([^"]*)"')


def _plain(value: Any) -> Any:
    if isinstance(value, np.ndarray):
        value = value.tolist()
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if value is None or isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return _FLOAT_MARK + format_float(value) if math.isfinite(float(value)) else None
    raise TypeError(f"Не умею сериализовать {type(value).__name__}")


def to_json(data: Any, indent: int = 2) -> str:
    """
    Детерминированная сериализация в JSON: ключи отсортированы,
    числа с плавающей точкой записаны 17 значащими цифрами, nan/inf -> null.

    Examples:
        >>> to_json({"b": 1, "a": [0.5, None]}, indent=0)
        '{"a": [0.5, null], "b": 1}'
    """
    text = json.dumps(_plain(data), indent=indent if indent > 0 else None, sort_keys=True, ensure_ascii=False)
    return _FLOAT_TOKEN.sub(r"\1", text)


def max_abs(array: Any) -> float:
    """
    Максимум модуля по массиву (0.0 для пустого массива).

    Examples:
        >>> max_abs([1.0, -3.0, 2.0])
        3.0
        >>> max_abs([])
        0.0
    """
    arr = np.asarray(array, dtype=float)
    if arr.size == 0:
        return 0.0
    return float(np.max(np.abs(arr)))


def relative_error(value: float, reference: float, floor: float = 1.0) -> float:
    """
    Относительная ошибка с нижней границей знаменателя.

    Examples:
        >>> relative_error(101.0, 100.0)
        0.01
        >>> relative_error(1e-9, 0.0)
        1e-09
    """
    return abs(value - reference) / max(floor, abs(reference))


def make_rng(seed: int) -> np.random.Generator:
    """Детерминированный генератор случайных чисел."""
    return np.random.default_rng(int(seed))


def setup_logging(level: str = "WARNING", log_file: Optional[str] = None) -> None:
    """
    Настройка логирования: stderr в формате "[LEVEL] сообщение"
    и, при необходимости, файл с отметками времени.

    Args:
        level: Уровень логирования (DEBUG, INFO, WARNING, ...)
        log_file: Путь к файлу лога или None
    """
    root = logging.getLogger()
    root.setLevel(getattr(logging, str(level).upper(), logging.WARNING))

    # Повторный вызов не должен плодить обработчики
    for handler in list(root.handlers):
        if getattr(handler, "_hermlab", False):
            root.removeHandler(handler)

    stream = logging.StreamHandler()
    stream.setFormatter(logging.Formatter(LOG_FORMAT))
    stream._hermlab = True
    root.addHandler(stream)

    if log_file:
        path = Path(log_file)
        path.parent.mkdir(parents=True, exist_ok=True)
        file_handler = logging.FileHandler(path, encoding="utf-8")
        file_handler.setFormatter(logging.Formatter(FILE_LOG_FORMAT, "%Y-%m-%d %H:%M:%S"))
        file_handler._hermlab = True
        root.addHandler(file_handler)


if __name__ == "__main__":
    # Тесты
    import doctest
    doctest.testmod()

    print("✅ Все тесты прошли успешно")
    print("\nПримеры использования:")
    print(f"format_float(0.1) = {format_float(0.1)}")
    print(f"to_json({{'s': 12.0}}) = {to_json({'s': 12.0}, indent=0)}")
