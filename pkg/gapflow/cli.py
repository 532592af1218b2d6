"""
Command-line front end.

    gapflow force       leading force and torque with the theorem comparison (JSON)
    gapflow resistance  leading-order resistance matrix (CSV)
    gapflow fields      field samples at given points (JSON)
    gapflow verify      verification suites (JSON report)
    gapflow sweep       traction series over the gap values (CSV)

Data goes to stdout (or --out); diagnostics go to stderr.
"""

import argparse
import json
import logging
import math
import sys
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
from pydantic import ValidationError

from . import __version__, asymptotics, fields, verify
from .config import RunConfig, parse_config, verify_settings
from .errors import (
    EXIT_INVARIANT_FAILURE,
    EXIT_OK,
    ConfigError,
    FitError,
    GapflowError,
    domain_error,
    exit_code,
)
from .logging_config import setup_logging
from .runner import Runner
from .suites import default_suites
from .trace import SimpleTrace

logger = logging.getLogger(__name__)

SUBCOMMANDS = ("force", "resistance", "fields", "verify", "sweep")
DEFAULT_FORMATS = {"force": "json", "resistance": "csv", "fields": "json", "verify": "json",
                   "sweep": "csv"}
QUANTITIES = ("velocity", "pressure", "stress", "divergence", "residual")
SWEEP_COLUMNS = ("epsilon", "mode", "F1", "F2", "F3", "T1", "T2", "T3", "A", "p", "B", "ell")
FORCE_KEYS = ("F", "T", "breakdown", "theorem_diff")


def format_number(value) -> str:
    """17 significant digits; non-finite values become null."""
    value = float(value)
    if not math.isfinite(value):
        return "null"
    return format(value, ".17g")


def dumps(value: Any) -> str:
    """JSON text with every float written to 17 significant digits."""
    if value is None:
        return "null"
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format_number(value)
    if isinstance(value, str):
        return json.dumps(value, ensure_ascii=False)
    if isinstance(value, np.ndarray):
        return dumps(value.tolist())
    if isinstance(value, dict):
        items = (f"{json.dumps(str(key))}: {dumps(item)}" for key, item in value.items())
        return "{" + ", ".join(items) + "}"
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(dumps(item) for item in value) + "]"
    raise TypeError(f"cannot serialise {type(value).__name__}")


def _csv_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    text = format_number(value)
    return "" if text == "null" else text


def csv_text(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    lines = [",".join(header)]
    lines.extend(",".join(_csv_cell(cell) for cell in row) for row in rows)
    return "\n".join(lines) + "\n"


def _ints(text: str) -> List[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _points(text: str) -> List[List[float]]:
    try:
        points = [[float(c) for c in chunk.split(",")] for chunk in text.split(";") if chunk.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"malformed point list {text!r}")
    if not points or any(len(p) != 3 for p in points):
        raise argparse.ArgumentTypeError("points need three coordinates each: x1,x2,x3;...")
    return points


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    group = common.add_argument_group("geometry and motion")
    group.add_argument("--m", type=float, help="convexity exponent (default 2)")
    group.add_argument("--kappa", type=float, help="profile coefficient")
    group.add_argument("--ellipsoid-R", dest="ellipsoid_R", type=float,
                       help="resolve kappa = 1/(m R^(m-1)) from an ellipsoid scale")
    group.add_argument("--epsilon", type=float, help="gap between the particles")
    group.add_argument("--r", type=float, help="neck radius (default R/2)")
    group.add_argument("--R", type=float, help="particle scale (default 1)")
    group.add_argument("--mu", type=float, help="viscosity (default 1)")
    group.add_argument("--U", help="translational velocity a,b,c")
    group.add_argument("--omega", help="angular velocity a,b,c")
    output = common.add_argument_group("numerics and output")
    output.add_argument("--epsilons", help="descending sweep values e1,e2,...")
    output.add_argument("--fit-model", dest="fit_model",
                        choices=[model.value for model in verify.FitModel])
    output.add_argument("--quad-tol", dest="quad_tol", type=float, help="quadrature tolerance")
    output.add_argument("--workers", type=int, help="threads for sweep points")
    output.add_argument("--format", choices=("json", "csv"))
    output.add_argument("--out", help="write data to PATH instead of stdout")
    output.add_argument("--config", help="flat key = value configuration file")
    output.add_argument("--log-level", dest="log_level", default="WARNING",
                        choices=("DEBUG", "INFO", "WARNING", "ERROR"))
    output.add_argument("--log-file", dest="log_file")

    parser = argparse.ArgumentParser(
        prog="gapflow",
        description="Stokes flow in the gap between two nearly touching particles.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("force", parents=[common], help="leading force and torque")
    sub.add_parser("resistance", parents=[common], help="leading-order resistance matrix")
    fields_parser = sub.add_parser("fields", parents=[common], help="sample the mode fields")
    fields_parser.add_argument("--quantity", choices=QUANTITIES, default="velocity")
    fields_parser.add_argument("--points", type=_points, required=True,
                               help="points x1,x2,x3;x1,x2,x3;...")
    fields_parser.add_argument("--modes", type=_ints, help="modes to evaluate (default: all admissible)")
    verify_parser = sub.add_parser("verify", parents=[common], help="run the verification suites")
    verify_parser.add_argument("--suites", help="suite or suite.action names, comma-separated")
    verify_parser.add_argument("--trace", action="store_true", help="echo check traces to stderr")
    sweep_parser = sub.add_parser("sweep", parents=[common], help="traction series over epsilons")
    sweep_parser.add_argument("--modes", type=_ints, help="modes to sweep (default: all admissible)")
    sweep_parser.add_argument("--with-gap", dest="with_gap", action="store_true",
                              help="add the diagonal duality-gap cell of each mode")
    return parser


CONFIG_KEYS = ("m", "kappa", "ellipsoid_R", "epsilon", "r", "R", "mu", "U", "omega", "epsilons",
               "fit_model", "quad_tol", "workers", "format", "out")


def _config_args(args: argparse.Namespace) -> Dict[str, Any]:
    return {key: getattr(args, key, None) for key in CONFIG_KEYS}


def _selected_modes(cfg: RunConfig, modes: Optional[List[int]]) -> List[int]:
    geom = cfg.geometry()
    admissible = fields.admissible_modes(geom)
    if not modes:
        return list(admissible)
    for alpha in modes:
        if alpha not in (1, 2, 3, 4, 5):
            raise ConfigError("modes", f"mode index {alpha} is not in 1..5")
        if alpha not in admissible:
            raise ConfigError("modes", f"mode {alpha} is only defined for m = 2")
    return list(modes)


def run_force(cfg: RunConfig, args: argparse.Namespace) -> tuple:
    geom, motion, fluid = cfg.geometry(), cfg.motion(), cfg.fluid()
    total = asymptotics.total_force_torque(geom, motion, fluid)
    case = "i" if geom.is_quadratic else "ii"
    comparison = asymptotics.theorem_force_torque(case, geom, motion, fluid)
    payload = {**total.to_dict(), "theorem_diff": comparison.to_dict()}
    if _format(cfg, "force") == "csv":
        rows = [[label, value] for label, value in zip(asymptotics.ROW_LABELS, total.vector())]
        return csv_text(("component", "value"), rows), EXIT_OK
    return dumps(payload) + "\n", EXIT_OK


def run_resistance(cfg: RunConfig, args: argparse.Namespace) -> tuple:
    matrix = asymptotics.resistance_matrix(cfg.geometry(), cfg.fluid())
    columns = asymptotics.COLUMN_LABELS[: matrix.shape[1]]
    if _format(cfg, "resistance") == "json":
        payload = {"rows": list(asymptotics.ROW_LABELS), "columns": list(columns), "matrix": matrix}
        return dumps(payload) + "\n", EXIT_OK
    rows = [[label] + list(row) for label, row in zip(asymptotics.ROW_LABELS, matrix)]
    return csv_text(("row",) + tuple(columns), rows), EXIT_OK


def _quantity(mode: fields.ModeField, quantity: str, x: np.ndarray, tol: float):
    if quantity == "velocity":
        return fields.velocity(mode, x)
    if quantity == "pressure":
        return fields.pressure(mode, x, tol)
    if quantity == "stress":
        return fields.stress(mode, x, tol)
    if quantity == "divergence":
        return fields.divergence(mode, x)
    residual = fields.residual33(mode, x)
    return [{"computed": c, "closed_form": f} for c, f in zip(residual.computed, residual.closed_form)]


def run_fields(cfg: RunConfig, args: argparse.Namespace) -> tuple:
    if _format(cfg, "fields") == "csv":
        raise ConfigError("format", "fields output is JSON only")
    geom, motion, fluid = cfg.geometry(), cfg.motion(), cfg.fluid()
    x = np.asarray(args.points, dtype=float)
    records = []
    for alpha in _selected_modes(cfg, args.modes):
        mode = fields.ModeField(alpha, geom, motion, fluid)
        values = _quantity(mode, args.quantity, x, cfg.quad_tol)
        for point, value in zip(x, values):
            records.append({"mode": alpha, "quantity": args.quantity, "point": point, "value": value})
    return dumps(records) + "\n", EXIT_OK


def run_verify(cfg: RunConfig, args: argparse.Namespace) -> tuple:
    if _format(cfg, "verify") == "csv":
        raise ConfigError("format", "verify output is JSON only")
    settings = verify_settings({"quad_tol": cfg.quad_tol, "workers": cfg.workers})
    trace = SimpleTrace(enable_console_output=getattr(args, "trace", False))
    runner = Runner(default_suites(settings), trace)
    selection = [item for item in (args.suites or "").split(",") if item.strip()] or None
    report = runner.run(selection)
    code = EXIT_OK if report.passed else EXIT_INVARIANT_FAILURE
    if not report.passed:
        logger.error("verification failed")
    return dumps(report.to_dict()) + "\n", code


def _fit_row(sweep: verify.SweepSpec, alpha: int, series: List[verify.Traction]) -> list:
    stacked = np.array([np.concatenate([t.F, t.T]) for t in series])
    component = int(np.argmax(np.abs(stacked[-1])))
    values = stacked[:, component]
    row = ["fit", alpha] + [None] * 6
    if np.all(values == 0.0):
        return row + [None, None, None, None]
    try:
        record = verify.exponent_fit(sweep, values)
    except FitError as exc:
        logger.warning("sweep fit for mode %d failed: %s", alpha, exc)
        return row + [None, None, None, None]
    logger.info("mode %d: fitted %s on %s", alpha, record.model.value,
                asymptotics.ROW_LABELS[component])
    return row + [record.A, record.p, record.B, None]


def run_sweep(cfg: RunConfig, args: argparse.Namespace) -> tuple:
    sweep = cfg.sweep()
    template, motion, fluid = cfg.geometry(), cfg.motion(), cfg.fluid()
    modes = _selected_modes(cfg, args.modes)
    gap = None
    if args.with_gap:
        gap = verify.duality_gap_sweep(sweep, template, motion, fluid, modes)

    rows = []
    for alpha in modes:
        def one(eps, alpha=alpha):
            mode = fields.ModeField(alpha, template.with_epsilon(eps), motion, fluid)
            return verify.traction_quadrature(mode, sweep.quad_tol)

        series = verify.map_ordered(one, sweep.epsilons, sweep.workers)
        for index, (eps, traction) in enumerate(zip(sweep.epsilons, series)):
            ell = gap.gap[index].cell(alpha, alpha) if gap is not None else None
            rows.append([eps, alpha] + list(traction.F) + list(traction.T) + [None, None, None, ell])
        rows.append(_fit_row(sweep, alpha, series))
    if _format(cfg, "sweep") == "json":
        return dumps([dict(zip(SWEEP_COLUMNS, row)) for row in rows]) + "\n", EXIT_OK
    return csv_text(SWEEP_COLUMNS, rows), EXIT_OK


RUNNERS = {
    "force": run_force,
    "resistance": run_resistance,
    "fields": run_fields,
    "verify": run_verify,
    "sweep": run_sweep,
}


def _format(cfg: RunConfig, command: str) -> str:
    return cfg.format or DEFAULT_FORMATS[command]


def _write(text: str, path: Optional[str]) -> None:
    if path:
        with open(path, "w") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)


def run(command: str, cfg: RunConfig, args: argparse.Namespace) -> int:
    """Execute one subcommand and write its output; returns the exit code."""
    if command not in SUBCOMMANDS:
        raise ConfigError("command", f"unknown subcommand {command!r}")
    text, code = RUNNERS[command](cfg, args)
    _write(text, cfg.out)
    return code


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(level=getattr(logging, args.log_level), log_file=args.log_file,
                  use_colors=sys.stderr.isatty())
    try:
        cfg = parse_config(_config_args(args), args.config,
                           require_geometry=args.command != "verify")
        return run(args.command, cfg, args)
    except ValidationError as exc:
        error = domain_error(exc)
        print(f"gapflow: error: {error}", file=sys.stderr)
        return exit_code(error)
    except GapflowError as exc:
        print(f"gapflow: error: {exc}", file=sys.stderr)
        return exit_code(exc)


if __name__ == "__main__":
    sys.exit(main())
