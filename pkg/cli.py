"""
Командная строка hermlab.

    python cli.py verify --n-max 3 --p-max 3
    python cli.py report --n 1 --p 2 --a 0.5 --c 1.5
    python cli.py optimize --n 4 --p 1 --method ascent
    python cli.py sectional --n 1 --p 16 --samples 10000
    python cli.py scan --n 1 --p 1 --output csv --out logs/scan.csv

Коды выхода: 0 при успехе, 1 при отрицательном математическом результате или
непройденной проверке, 2 при ошибке параметров.
"""
import argparse
import io
import logging
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, List, Optional, Sequence

import numpy as np
import pandas as pd

from algebra import ParameterError, SpaceParams
from config import COMMAND_LABELS, OUTPUT_FORMATS, RUN, env_log_file, env_log_level, env_seed, validate_config
from curvature import curvature_report, sectional_extremes
from optimize import METHODS, AscentNotConvergedError, find_critical_point, scan_grid
from structures import MetricParams
from utils import format_float, setup_logging, to_json
from verification import default_spaces, run_verification

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RunConfig:
    command: str
    n: Optional[int] = None
    p: Optional[int] = None
    a: float = 0.0
    c: float = 1.0
    samples: int = RUN.samples
    seed: int = RUN.seed
    tolerance: float = RUN.tolerance
    output_format: str = RUN.output_format
    output_path: Optional[str] = None
    n_max: int = RUN.n_max
    p_max: int = RUN.p_max
    metrics: int = RUN.metrics_per_space
    method: str = "closed_form"
    a_min: float = RUN.a_range[0]
    a_max: float = RUN.a_range[1]
    a_steps: int = RUN.scan_steps
    c_min: float = RUN.c_range[0]
    c_max: float = RUN.c_range[1]
    c_steps: int = RUN.scan_steps

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "RunConfig":
        """HERMLAB_SEED, если задан, имеет приоритет над --seed."""
        fields = {k: v for k, v in vars(args).items() if k in cls.__dataclass_fields__ and v is not None}
        seed = env_seed()
        if seed is not None:
            fields["seed"] = seed
        return cls(**fields)

    def space(self) -> SpaceParams:
        if self.n is None or self.p is None:
            raise ParameterError(f"Команде {self.command} нужны --n и --p")
        return SpaceParams(self.n, self.p)

    def metric(self) -> MetricParams:
        return MetricParams(self.a, self.c)


@dataclass
class CommandResult:
    exit_code: int
    payload: Any
    rows: List[dict]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", type=int, help="размерность первой сферы S^{2n+1}")
    common.add_argument("--p", type=int, help="размерность второй сферы S^{2p+1}")
    common.add_argument("--a", type=float, help="параметр сдвига a")
    common.add_argument("--c", type=float, help="параметр масштаба c > 0")
    common.add_argument("--samples", type=int, help="число случайных плоскостей")
    common.add_argument("--seed", type=int, help="зерно генератора (HERMLAB_SEED имеет приоритет)")
    common.add_argument("--tolerance", type=float, help="допуск проверок")
    common.add_argument("--output", dest="output_format", choices=OUTPUT_FORMATS, help="формат вывода")
    common.add_argument("--out", dest="output_path", help="файл вывода (по умолчанию stdout)")
    common.add_argument("--log-level", help="уровень логирования (DEBUG, INFO, WARNING)")

    parser = argparse.ArgumentParser(prog="hermlab", description="Эрмитовы структуры на S^{2n+1} × S^{2p+1}")
    commands = parser.add_subparsers(dest="command", required=True)

    verify = commands.add_parser("verify", parents=[common], help=COMMAND_LABELS["verify"])
    verify.add_argument("--n-max", type=int)
    verify.add_argument("--p-max", type=int)
    verify.add_argument("--metrics", type=int, help="случайных (a, c) на пространство")

    commands.add_parser("report", parents=[common], help=COMMAND_LABELS["report"])

    optimize = commands.add_parser("optimize", parents=[common], help=COMMAND_LABELS["optimize"])
    optimize.add_argument("--method", choices=METHODS)

    commands.add_parser("sectional", parents=[common], help=COMMAND_LABELS["sectional"])

    scan = commands.add_parser("scan", parents=[common], help=COMMAND_LABELS["scan"])
    for name in ("a", "c"):
        scan.add_argument(f"--{name}-min", type=float)
        scan.add_argument(f"--{name}-max", type=float)
        scan.add_argument(f"--{name}-steps", type=int)
    return parser


# --- Команды ---

def cmd_verify(config: RunConfig) -> CommandResult:
    if config.n is not None or config.p is not None:
        spaces = [config.space()]
    else:
        if config.n_max < 0 or config.p_max < 0:
            raise ParameterError("--n-max и --p-max должны быть неотрицательными")
        spaces = default_spaces(config.n_max, config.p_max)
        if not spaces:
            raise ParameterError("Сетка (n, p) пуста")
    if config.metrics < 1 or config.samples < 1:
        raise ParameterError("--metrics и --samples должны быть положительными")

    report = run_verification(spaces, config.metrics, config.samples, config.seed, config.tolerance)
    if not report.passed:
        names = ", ".join(check.name for check in report.failed())
        print(f"[WARN] Не пройдены проверки: {names}", file=sys.stderr)
    return CommandResult(0 if report.passed else 1, report.to_dict(), report.rows())


def cmd_report(config: RunConfig) -> CommandResult:
    report = curvature_report(config.space(), config.metric())
    payload = report.to_dict()
    rows = [
        {"field": "ricci", "i": i, "j": j, "value": float(v)}
        for (i, j), v in np.ndenumerate(report.ricci.sym)
    ]
    for name in ("scalar_trace", "scalar_closed_form", "einstein_constant"):
        rows.append({"field": name, "i": None, "j": None, "value": payload[name]})
    for name in ("ricci_eigen_paper", "ricci_operator_spectrum"):
        rows += [{"field": name, "i": i, "j": None, "value": v} for i, v in enumerate(payload[name])]
    return CommandResult(0, payload, rows)


def cmd_optimize(config: RunConfig) -> CommandResult:
    space = config.space()
    try:
        result = find_critical_point(space.n, space.p, config.method)
    except AscentNotConvergedError as exc:
        print(f"[WARN] {exc}", file=sys.stderr)
        payload = {
            "n": config.n, "p": config.p, "method": config.method, "exists": True,
            "converged": False, "a_last": exc.a, "c_last": exc.c,
            "iterations": exc.iterations, "gradient_norm": exc.gradient_norm,
        }
        return CommandResult(1, payload, [payload])

    payload = result.to_dict()
    row = dict(payload, hessian_eigenvalues=";".join(format_float(v) for v in result.hessian_eigenvalues))
    if not result.exists:
        print(f"[WARN] n={result.n}, p={result.p}: нет критических точек (no critical points)", file=sys.stderr)
        return CommandResult(1, payload, [row])
    return CommandResult(0, payload, [row])


def cmd_sectional(config: RunConfig) -> CommandResult:
    if config.samples < 1:
        raise ParameterError("--samples должно быть положительным")
    report = sectional_extremes(config.space(), samples=config.samples, seed=config.seed,
                                tol=config.tolerance)
    payload = report.to_dict()
    row = {k: v for k, v in payload.items() if k != "named"}
    for label, (low, high) in report.named.items():
        row[f"{label}_min"] = low
        row[f"{label}_max"] = high
    exit_code = 0 if report.samples_in_bounds == 1.0 and report.bounds_achieved else 1
    return CommandResult(exit_code, payload, [row])


def _axis(low: float, high: float, steps: int, name: str) -> np.ndarray:
    if steps < 1:
        raise ParameterError(f"--{name}-steps должно быть положительным")
    if high < low:
        raise ParameterError(f"--{name}-max меньше --{name}-min")
    return np.linspace(low, high, steps)


def cmd_scan(config: RunConfig) -> CommandResult:
    space = config.space()
    a_values = _axis(config.a_min, config.a_max, config.a_steps, "a")
    c_values = _axis(config.c_min, config.c_max, config.c_steps, "c")
    rows = [{"a": a, "c": c, "s": s} for a, c, s in scan_grid(space.n, space.p, a_values, c_values)]
    return CommandResult(0, {"n": space.n, "p": space.p, "rows": rows}, rows)


COMMANDS = {
    "verify": cmd_verify,
    "report": cmd_report,
    "optimize": cmd_optimize,
    "sectional": cmd_sectional,
    "scan": cmd_scan,
}


# --- Вывод ---

def render(result: CommandResult, output_format: str) -> str:
    if output_format == "csv":
        buffer = io.StringIO()
        pd.DataFrame(result.rows).to_csv(buffer, index=False, float_format="%.17g", lineterminator="\n")
        return buffer.getvalue()
    return to_json(result.payload) + "\n"


def write_output(text: str, path: Optional[str]) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(text, encoding="utf-8", newline="")


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2

    setup_logging(args.log_level or env_log_level(), env_log_file())

    is_valid, error = validate_config()
    if not is_valid:
        print(f"[ERROR] {error}", file=sys.stderr)
        return 2

    try:
        config = RunConfig.from_args(args)
        logger.info("Команда %s: %s", config.command, COMMAND_LABELS[config.command])
        result = COMMANDS[config.command](config)
    except ParameterError as exc:
        print(f"[ERROR] {exc}", file=sys.stderr)
        return 2

    write_output(render(result, config.output_format), config.output_path)
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
