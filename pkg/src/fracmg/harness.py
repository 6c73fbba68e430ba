"""Batch experiments: iteration counts and energy errors over (s, nx) grids."""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .analysis import ExactProblem, energy_error
from .assembly import assemble_load, write_matrix_market
from .meshes import FracParams, build_hierarchy, make_grading
from .vcycle import MgHierarchy, MultigridFailure, mg_solve

logger = logging.getLogger(__name__)

__all__ = [
    "ExperimentConfig",
    "run_cell",
    "run_table",
    "run_comparison",
    "TABLE_COLUMNS",
    "COMPARISON_COLUMNS",
    "to_csv",
    "to_json",
]

TABLE_COLUMNS = ["dim", "s", "nx", "dofs", "unknowns", "grading", "smoother",
                 "iterations", "energy_error", "error_ratio", "residual_rate", "cpu_s"]
COMPARISON_COLUMNS = ["dim", "s", "nx", "dofs", "I(o)", "I(m)", "E(o)", "E(m)",
                      "CPU(o)", "CPU(m)"]
# columns that vary between identical runs
TIMING_COLUMNS = {"cpu_s", "CPU(o)", "CPU(m)"}


@dataclass
class ExperimentConfig:
    dim: int = 1
    s_values: list = field(default_factory=lambda: [0.15, 0.3, 0.6, 0.8])
    nx_values: list = field(default_factory=lambda: [16, 32, 64, 128, 256, 512])
    grading: str = "original"
    smoother: str = "line"
    m: int = 3
    tol: float = 1e-7
    max_iter: int = 200
    xi_star: float = 0.75
    nx0: int = 4
    seed: int = 0
    output: str | None = None
    export_matrices: str | None = None

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError("dim must be 1 or 2")
        if self.grading not in ("original", "modified", "both", "uniform"):
            raise ValueError(f"unknown grading {self.grading!r}")
        if self.smoother not in ("line", "point"):
            raise ValueError(f"unknown smoother {self.smoother!r}")
        for nx in self.nx_values:
            J = math.log2(nx / self.nx0)
            if nx < self.nx0 or J != int(J):
                raise ValueError(f"nx={nx} is not nx0 * 2**J with nx0={self.nx0}")


def run_cell(config: ExperimentConfig, s: float, nx: int, grading: str) -> dict:
    """Build, assemble and solve one (s, nx, grading) instance."""
    params = FracParams(s)
    gmap = make_grading(grading, params.gamma, params.Y, config.xi_star)
    J = int(round(math.log2(nx / config.nx0)))
    meshes = build_hierarchy(params, gmap, J, config.nx0, config.dim)
    hier = MgHierarchy.build(meshes, params.alpha, config.smoother, m=config.m)
    problem = ExactProblem(config.dim, s)
    fine = meshes[-1]
    load = assemble_load(fine, s, problem.f)
    if config.export_matrices:
        tag = f"n{config.dim}_s{s:g}_nx{nx}_{grading}"
        write_matrix_market(config.export_matrices, hier.levels[-1].op, load, prefix=tag)
    row = {
        "dim": config.dim, "s": s, "nx": nx,
        "dofs": fine.vertex_count, "unknowns": fine.n_unknowns,
        "grading": grading, "smoother": config.smoother,
    }
    t0 = time.perf_counter()
    try:
        x, report = mg_solve(hier, load.values, config.tol, config.max_iter)
    except MultigridFailure as exc:
        row.update(iterations=f"FAIL({exc.report.iterations})", energy_error="",
                   residual_rate=_fmt(exc.report.contraction_estimate), converged=False,
                   cpu_s=_fmt(time.perf_counter() - t0, 4))
        logger.warning("s=%g nx=%d %s: %s", s, nx, grading, exc)
        return row
    cpu = time.perf_counter() - t0
    row.update(iterations=report.iterations,
               energy_error=energy_error(problem, hier.A, x),
               residual_rate=_fmt(report.contraction_estimate), converged=True,
               cpu_s=_fmt(cpu, 4))
    return row


def _fmt(v, digits=6):
    return float(f"{v:.{digits}g}")


def _error_ratios(rows):
    prev = {}
    for row in rows:
        key = (row["s"], row["grading"])
        e = row["energy_error"]
        if e != "" and prev.get(key) not in (None, ""):
            row["error_ratio"] = _fmt(prev[key] / e)
        else:
            row["error_ratio"] = ""
        prev[key] = e
    for row in rows:
        if row["energy_error"] != "":
            row["energy_error"] = _fmt(row["energy_error"], 8)
    return rows


def run_table(config: ExperimentConfig) -> list[dict]:
    """One row per (s, nx) in config order. Solver failures are recorded in
    the row (``iterations = "FAIL(n)"``) and the run continues."""
    if config.grading == "both":
        raise ValueError("use run_comparison for grading='both'")
    rows = [run_cell(config, s, nx, config.grading)
            for s in config.s_values for nx in config.nx_values]
    return _error_ratios(rows)


def run_comparison(config: ExperimentConfig) -> list[dict]:
    """Original vs modified grading side by side, per (s, nx)."""
    rows = []
    for s in config.s_values:
        if FracParams(s).gamma <= 4:
            logger.warning("s=%g: gamma <= 4, modified grading equals the original", s)
        for nx in config.nx_values:
            o = run_cell(config, s, nx, "original")
            m = run_cell(config, s, nx, "modified")
            rows.append({
                "dim": config.dim, "s": s, "nx": nx, "dofs": o["dofs"],
                "I(o)": o["iterations"], "I(m)": m["iterations"],
                "E(o)": _fmt(o["energy_error"], 8) if o["converged"] else "",
                "E(m)": _fmt(m["energy_error"], 8) if m["converged"] else "",
                "CPU(o)": o["cpu_s"], "CPU(m)": m["cpu_s"],
                "converged": o["converged"] and m["converged"],
            })
    return rows


def to_csv(rows, columns) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=columns, extrasaction="ignore", lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def to_json(rows, config: ExperimentConfig) -> str:
    return json.dumps({"config": asdict(config), "rows": rows}, indent=2)


def write_results(rows, config: ExperimentConfig, fmt="csv") -> str:
    columns = COMPARISON_COLUMNS if config.grading == "both" else TABLE_COLUMNS
    text = to_csv(rows, columns) if fmt == "csv" else to_json(rows, config)
    if config.output:
        Path(config.output).write_text(text)
    return text
