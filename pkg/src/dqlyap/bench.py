"""
Cost benchmarks: model ratios, instrumented multiplication counts and
median wall times over grid sizes and solver methods.
"""
from __future__ import annotations

import csv
import io
import json
import statistics
import time
from dataclasses import asdict, dataclass

import numpy as np

from .boundary import BoundaryCondition, Face
from .dq import GridSpec
from .exceptions import DQError, ParameterError
from .problems import (
    ConvDiff3dSpec,
    ConvDiffSpec,
    PoissonSpec,
    TransientSpec,
    assemble_convdiff,
    assemble_convdiff3d,
    assemble_poisson,
    manufactured_poisson,
    step_transient,
)
from .sylvester import METHODS, flop_model, solve_sylvester

__all__ = [
    "BenchCase",
    "BenchRecord",
    "RatioRow",
    "run_ratio_table",
    "run_bench",
    "records_to_json",
    "records_to_csv",
    "format_ratio_table",
]

PROBLEM_KINDS = ("poisson", "convdiff", "convdiff3d", "transient")
SCHEMES = ("backward-euler", "rk4")
RESIDUAL_TOL = 1e-8
RECORD_FIELDS = (
    "case_id",
    "n_points",
    "method",
    "counted_multiplications",
    "model_multiplications",
    "wall_time",
    "relative_residual",
    "error",
)


@dataclass(frozen=True)
class BenchCase:
    kind: str = "poisson"
    sizes: tuple = (7, 9, 11)
    methods: tuple = ("bartels-stewart", "kronecker-gauss")
    repetitions: int = 3
    seed: int = 0
    transient_steps: int = 10

    def __post_init__(self):
        if self.kind not in PROBLEM_KINDS:
            raise ParameterError(f"unknown problem kind {self.kind!r}")
        if self.repetitions < 3:
            raise ParameterError("repetitions must be at least 3")
        if not self.sizes:
            raise ParameterError("sizes must not be empty")
        if any(int(n) < 5 for n in self.sizes):
            raise ParameterError("grid sizes must be at least 5")
        allowed = SCHEMES if self.kind == "transient" else METHODS
        for m in self.methods:
            if m not in allowed:
                raise ParameterError(f"method {m!r} not valid for {self.kind}")
        object.__setattr__(self, "sizes", tuple(int(n) for n in self.sizes))
        object.__setattr__(self, "methods", tuple(self.methods))

    @property
    def case_id(self) -> str:
        return f"{self.kind}-s{self.seed}"


@dataclass
class BenchRecord:
    case_id: str
    n_points: int
    method: str
    counted_multiplications: int | None
    model_multiplications: float | None
    wall_time: float | None
    relative_residual: float | None
    error: str | None = None

    def to_dict(self, include_time=True):
        d = asdict(self)
        if not include_time:
            d.pop("wall_time")
        return d


@dataclass(frozen=True)
class RatioRow:
    n_points: int
    model_ratio: float
    counted_ratio: float
    centro_model_ratio: float
    centro_counted_ratio: float


def _poisson_problem(n_points, rng=None):
    grid = GridSpec.regular(n_points, "chebyshev", 2)
    if rng is None:
        source = manufactured_poisson()[1]
    else:
        source = rng.standard_normal(grid.interior_shape)
    return assemble_poisson(PoissonSpec(grid, 1.0, source))


def run_ratio_table(sizes) -> list:
    """Model and instrumented cost ratios against the Kronecker baseline.

    Counted ratios come from bartels-stewart and centro-split solves of
    the manufactured Poisson problem, divided by the kronecker-gauss count
    of the same problem.
    """
    rows = []
    for n_points in sizes:
        if int(n_points) < 5:
            raise ParameterError("grid sizes must be at least 5")
        n = int(n_points) - 2
        base_model = flop_model("kronecker-gauss", n, n)
        p = _poisson_problem(int(n_points))
        base = solve_sylvester(p, "kronecker-gauss").report.counted_multiplications
        bs = solve_sylvester(p, "bartels-stewart").report.counted_multiplications
        centro = solve_sylvester(p, "centro-split").report.counted_multiplications
        rows.append(RatioRow(
            n_points=int(n_points),
            model_ratio=flop_model("r-thr", n, n) / base_model,
            counted_ratio=bs / base,
            centro_model_ratio=flop_model("centro-split", n, n) / base_model,
            centro_counted_ratio=centro / base,
        ))
    return rows


def format_ratio_table(rows) -> str:
    lines = [f"{'N':>4} {'model':>8} {'counted':>8} {'centro':>8} {'c.count':>8}"]
    for r in rows:
        lines.append(
            f"{r.n_points:>4} {100 * r.model_ratio:>7.1f}% {100 * r.counted_ratio:>7.1f}% "
            f"{100 * r.centro_model_ratio:>7.1f}% {100 * r.centro_counted_ratio:>7.1f}%"
        )
    return "\n".join(lines)


def _make_runner(case: BenchCase, n_points: int, method: str):
    """Return a zero-argument callable producing a SolveReport."""
    rng = np.random.default_rng([case.seed, n_points])
    if case.kind == "poisson":
        p = _poisson_problem(n_points, rng)
        return lambda: solve_sylvester(p, method).report
    if case.kind == "convdiff":
        grid = GridSpec.regular(n_points, "chebyshev", 2)
        p = assemble_convdiff(ConvDiffSpec(grid, 1.0, 1.0, rng.standard_normal(grid.interior_shape)))
        return lambda: solve_sylvester(p, method).report
    if case.kind == "convdiff3d":
        grid = GridSpec.regular(n_points, "chebyshev", 3)
        bc_x = BoundaryCondition(Face("dirichlet", 1.0), Face("neumann", 0.0))
        p = assemble_convdiff3d(ConvDiff3dSpec(grid, bc_x=bc_x))
        return lambda: solve_sylvester(p, method).report
    grid = GridSpec.regular(n_points, "chebyshev", 2)
    steady = ConvDiffSpec(grid, 1.0, 1.0)
    spec = TransientSpec(steady, rng.standard_normal(grid.interior_shape), 1e-4,
                         case.transient_steps, method)
    return lambda: step_transient(spec).report


def run_bench(case: BenchCase) -> list:
    """One record per (size, method); failures are recorded, not raised."""
    records = []
    for n_points in case.sizes:
        for method in case.methods:
            try:
                run = _make_runner(case, n_points, method)
                times, counts, report = [], set(), None
                for _ in range(case.repetitions):
                    start = time.perf_counter()
                    report = run()
                    elapsed = time.perf_counter() - start
                    res = report.relative_residual
                    if method != "rk4" and not res <= RESIDUAL_TOL:
                        raise DQError(
                            f"residual {report.relative_residual:.3e} exceeds {RESIDUAL_TOL:g}"
                        )
                    times.append(elapsed)
                    counts.add(report.counted_multiplications)
                if len(counts) != 1:
                    raise DQError(f"multiplication counts varied across repetitions: {sorted(counts)}")
                model = report.model_multiplications
                records.append(BenchRecord(
                    case_id=case.case_id,
                    n_points=n_points,
                    method=method,
                    counted_multiplications=int(report.counted_multiplications),
                    model_multiplications=None if model != model else float(model),
                    wall_time=statistics.median(times),
                    relative_residual=None if res != res else float(res),
                ))
            except (DQError, ValueError, ArithmeticError) as exc:
                records.append(BenchRecord(
                    case_id=case.case_id, n_points=n_points, method=method,
                    counted_multiplications=None, model_multiplications=None,
                    wall_time=None, relative_residual=None,
                    error=f"{type(exc).__name__}: {exc}",
                ))
    return records


def records_to_json(records, timings=True) -> str:
    """Deterministic JSON; wall times live in a separate ``timings`` list."""
    doc = {"records": [r.to_dict(include_time=False) for r in records]}
    if timings:
        doc["timings"] = [r.wall_time for r in records]
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def records_to_csv(records) -> str:
    """CSV without the timing column, so identical inputs give identical bytes."""
    buf = io.StringIO()
    fields = [f for f in RECORD_FIELDS if f != "wall_time"]
    writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    writer.writeheader()
    for r in records:
        writer.writerow({k: ("" if v is None else (repr(v) if isinstance(v, float) else v))
                         for k, v in r.to_dict(include_time=False).items()})
    return buf.getvalue()
