"""Command-line front end: ``dqlyap solve | bench | convergence``."""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import traceback
from pathlib import Path

import numpy as np

from . import bench as bench_mod
from .config import METHOD_TAGS, ConfigError, RunConfig, load_config
from .exceptions import DQError
from .problems import (
    ConvDiff3dSpec,
    ConvDiffSpec,
    PoissonSpec,
    TransientSpec,
    full_field,
    manufactured_convdiff,
    manufactured_poisson,
    sample_field,
    solve_convdiff,
    solve_convdiff3d,
    solve_poisson,
    step_transient,
)

__all__ = ["main", "build_parser", "run_config", "field_to_csv"]

EXIT_OK, EXIT_USAGE, EXIT_SOLVER = 0, 2, 3
COMPARE_TOL = 1e-9

_CONTRACTS = {
    "linalg": "linalg_core",
    "dq": "dq_operators",
    "boundary": "boundary_reduction",
    "sylvester": "sylvester_solver",
    "centrosym": "centrosym",
    "problems": "pde_problems",
    "estimators": "pde_problems",
    "bench": "bench_harness",
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _contract(exc) -> str:
    """Name of the innermost package module the exception passed through."""
    name = "pde_problems"
    for frame in traceback.extract_tb(exc.__traceback__):
        stem = Path(frame.filename).stem
        if Path(frame.filename).parent.name == "dqlyap" and stem in _CONTRACTS:
            name = _CONTRACTS[stem]
    return name


def _fmt(v) -> str:
    return repr(float(v))


def field_to_csv(field, axes_points) -> str:
    """Header ``x,y[,z],value``; rows run over grid points in C order."""
    names = "xyz"[: len(axes_points)]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(list(names) + ["value"])
    for idx in np.ndindex(*field.shape):
        writer.writerow([_fmt(axes_points[a][i]) for a, i in enumerate(idx)] + [_fmt(field[idx])])
    return buf.getvalue()


def _json_clean(obj):
    if isinstance(obj, dict):
        return {k: _json_clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_clean(v) for v in obj]
    if isinstance(obj, (float, np.floating)):
        return None if not math.isfinite(obj) else float(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def _source(cfg: RunConfig, which):
    if which == "zero":
        return None
    if which == "manufactured-sin":
        if cfg.problem == "poisson":
            return manufactured_poisson(cfg.beta)[1]
        return manufactured_convdiff(cfg.alpha, cfg.beta)[1]
    return which.constant


def _homogeneous(cfg: RunConfig) -> bool:
    return all(f.kind == "dirichlet" and f.value == 0.0
               for b in cfg.bc.values() for f in (b.left, b.right))


def _exact(cfg: RunConfig):
    # the sin-sin field needs zero Dirichlet data on every face
    if cfg.source != "manufactured-sin" or cfg.problem == "convdiff3d" or not _homogeneous(cfg):
        return None
    if cfg.problem == "poisson":
        return manufactured_poisson(cfg.beta)[0]
    return manufactured_convdiff(cfg.alpha, cfg.beta)[0]


def _bcs(cfg: RunConfig, axes):
    return {f"bc_{a}": bc for a in axes if (bc := cfg.boundary(a)) is not None}


def run_config(cfg: RunConfig, method=None):
    """Solve ``cfg``; returns ``(field, axes_points, report_dict)``."""
    method = method or cfg.method
    grid = cfg.grid_spec()
    points = [ax.points for ax in grid.axes]
    if cfg.problem == "poisson":
        spec = PoissonSpec(grid, cfg.beta, _source(cfg, cfg.source), **_bcs(cfg, "xy"))
        sol = solve_poisson(spec, method)
        field, report = sol.field, sol.report.to_dict()
    elif cfg.problem == "convdiff":
        spec = ConvDiffSpec(grid, cfg.alpha, cfg.beta, _source(cfg, cfg.source), **_bcs(cfg, "xy"))
        sol = solve_convdiff(spec, method)
        field, report = sol.field, sol.report.to_dict()
    elif cfg.problem == "convdiff3d":
        spec = ConvDiff3dSpec(grid, cfg.beta, cfg.gamma, **_bcs(cfg, "xyz"))
        sol = solve_convdiff3d(spec, "bartels-stewart" if method == "auto" else method)
        field, report = sol.field, sol.report.to_dict()
    else:
        steady = ConvDiffSpec(grid, cfg.alpha, cfg.beta, _source(cfg, cfg.source), **_bcs(cfg, "xy"))
        tc = cfg.transient
        interior = [ax.interior for ax in grid.axes]
        if tc.initial == "manufactured-sin":
            initial = sample_field(manufactured_convdiff()[0], *interior)
        else:
            initial = sample_field(None if tc.initial == "zero" else tc.initial.constant, *interior)
        res = step_transient(TransientSpec(steady, initial, tc.dt, tc.steps, tc.scheme))
        field, report = full_field(steady, res.trajectory[-1]), res.report.to_dict()
        report["final_time"] = float(res.times[-1])
    report["problem"] = cfg.problem
    report["grid_shape"] = list(field.shape)
    exact = _exact(cfg)
    if exact is not None and cfg.problem != "transient":
        coords = np.meshgrid(*points, indexing="ij")
        report["max_error"] = float(np.abs(field - exact(*coords))[1:-1, 1:-1].max())
    return field, points, report


def _parse_sizes(text):
    try:
        sizes = [int(s) for s in text.split(",") if s.strip()]
    except ValueError as exc:
        raise UsageError(f"bad --sizes value {text!r}") from exc
    if not sizes:
        raise UsageError("--sizes must list at least one grid size")
    if min(sizes) < 5:
        raise UsageError("grid sizes must be at least 5")
    return sizes


def _write(path, text, stdout):
    if path is None:
        stdout.write(text)
    else:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text)


def cmd_solve(args, stdout):
    cfg = load_config(args.config)
    method = args.method or cfg.method
    field, points, report = run_config(cfg, method)
    if args.compare:
        other, _, _ = run_config(cfg, args.compare)
        diff = float(np.abs(field - other).max())
        ok = diff <= COMPARE_TOL * (1.0 + float(np.abs(field).max()))
        report["compare"] = {"method": args.compare, "max_abs_diff": diff, "agree": bool(ok)}
    field_path = args.out or cfg.output.field
    report_path = cfg.output.report or (str(Path(field_path).with_suffix(".json")) if field_path else None)
    _write(field_path, field_to_csv(field, points), stdout)
    text = json.dumps(_json_clean(report), indent=2, sort_keys=True) + "\n"
    if report_path is None:
        sys.stderr.write(text)
    else:
        _write(report_path, text, stdout)
    if args.compare and not report["compare"]["agree"]:
        sys.stderr.write(
            f"error: sylvester_solver: {method} and {args.compare} disagree by {diff:.3e}\n"
        )
        return EXIT_SOLVER
    return EXIT_OK


def cmd_bench(args, stdout):
    sizes = _parse_sizes(args.sizes)
    methods = tuple(m for m in args.methods.split(",") if m)
    try:
        case = bench_mod.BenchCase(args.problem, tuple(sizes), methods, args.repetitions, args.seed)
    except DQError as exc:
        raise UsageError(str(exc)) from exc
    records = bench_mod.run_bench(case)
    if args.out:
        stem = Path(args.out)
        if stem.suffix in (".json", ".csv"):
            stem = stem.with_suffix("")
        _write(str(stem) + ".json", bench_mod.records_to_json(records), stdout)
        _write(str(stem) + ".csv", bench_mod.records_to_csv(records), stdout)
    if args.table == "ratios":
        stdout.write(bench_mod.format_ratio_table(bench_mod.run_ratio_table(sizes)) + "\n")
    else:
        stdout.write(bench_mod.records_to_csv(records))
    failed = [r for r in records if r.error]
    for r in failed:
        sys.stderr.write(f"error: bench_harness: N={r.n_points} {r.method}: {r.error}\n")
    return EXIT_SOLVER if failed else EXIT_OK


def cmd_convergence(args, stdout):
    sizes = _parse_sizes(args.sizes)
    if args.config:
        cfg = load_config(args.config)
    else:
        cfg = RunConfig(problem=args.problem, source="manufactured-sin")
    if args.config and args.problem and args.problem != cfg.problem:
        raise UsageError(f"--problem {args.problem} conflicts with config problem {cfg.problem}")
    if cfg.problem not in ("poisson", "convdiff"):
        raise UsageError(f"no manufactured solution for problem {cfg.problem!r}")
    if cfg.source != "manufactured-sin":
        raise UsageError("convergence needs source 'manufactured-sin' (no exact solution otherwise)")
    if not _homogeneous(cfg):
        raise UsageError("the manufactured solution needs zero Dirichlet data on every face")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["n_points", "max_error"])
    for n in sizes:
        if isinstance(cfg.grid, list):
            grid = [g.model_copy(update={"n": n}) for g in cfg.grid]
        else:
            grid = cfg.grid.model_copy(update={"n": n})
        sized = cfg.model_copy(update={"grid": grid})
        _, _, report = run_config(sized, args.method)
        writer.writerow([n, _fmt(report["max_error"])])
    _write(args.out, buf.getvalue(), stdout)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dqlyap", description="DQ Sylvester solvers for Poisson and convection-diffusion")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", help="solve the problem described by a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--method", choices=METHOD_TAGS)
    p.add_argument("--compare", nargs="?", const="kronecker-gauss", choices=METHOD_TAGS,
                   help="also solve with this method (default kronecker-gauss) and check agreement")
    p.add_argument("--out", help="field CSV path; the report goes next to it as .json")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("bench", help="cost benchmarks and ratio tables")
    p.add_argument("--sizes", required=True, help="comma-separated grid sizes N")
    p.add_argument("--methods", default="bartels-stewart,kronecker-gauss")
    p.add_argument("--problem", default="poisson", choices=bench_mod.PROBLEM_KINDS)
    p.add_argument("--repetitions", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--table", choices=("ratios", "records"), default="records")
    p.add_argument("--out", help="output stem; writes STEM.json and STEM.csv")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("convergence", help="manufactured-solution error sweep")
    p.add_argument("--sizes", required=True)
    p.add_argument("--problem", choices=("poisson", "convdiff"))
    p.add_argument("--config")
    p.add_argument("--method", choices=METHOD_TAGS)
    p.add_argument("--out")
    p.set_defaults(func=cmd_convergence)
    return parser


def main(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    try:
        args = build_parser().parse_args(argv)
        if args.command == "convergence" and not (args.problem or args.config):
            args.problem = "poisson"
        return args.func(args, stdout)
    except (UsageError, ConfigError) as exc:
        sys.stderr.write(f"usage error: {exc}\n")
        return EXIT_USAGE
    except (DQError, ArithmeticError, ValueError) as exc:
        sys.stderr.write(f"error: {_contract(exc)}: {type(exc).__name__}: {exc}\n")
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
