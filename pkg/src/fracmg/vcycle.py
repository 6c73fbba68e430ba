"""Symmetric V-cycle multigrid and the outer residual iteration."""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .assembly import WeightedOperator, assemble_operator
from .meshes import TensorMesh
from .smoothers import (BACKWARD, FORWARD, LinePlan, build_line_plan, line_gs_sweep,
                        point_gs_sweep)
from .transfer import TransferPair, build_transfer

__all__ = [
    "Level",
    "MgHierarchy",
    "SolveReport",
    "MultigridFailure",
    "DivergenceError",
    "MaxIterationsError",
    "vcycle_apply",
    "mg_solve",
    "estimate_contraction",
]


@dataclass(frozen=True)
class Level:
    mesh: TensorMesh
    op: WeightedOperator
    plan: LinePlan | None = None


@dataclass
class MgHierarchy:
    """Levels ``0..J`` (coarse to fine), transfers between them and cycle
    parameters. ``smoother`` is ``"line"`` or ``"point"``."""

    levels: list[Level]
    transfers: list[TransferPair]
    m: int = 3
    smoother: str = "line"
    coarse_factor: tuple = field(default=None, repr=False)

    def __post_init__(self):
        if len(self.transfers) != len(self.levels) - 1:
            raise ValueError("need exactly one transfer per consecutive level pair")
        if self.smoother not in ("line", "point"):
            raise ValueError(f"unknown smoother {self.smoother!r}")
        if self.smoother == "line" and any(lv.plan is None for lv in self.levels[1:]):
            raise ValueError("line smoother requires a LinePlan on every level above 0")
        if self.coarse_factor is None:
            A0 = self.levels[0].op.flat.toarray()
            self.coarse_factor = scipy.linalg.cho_factor(A0, lower=True)

    @classmethod
    def build(cls, meshes, alpha, smoother="line", ordering="redblack", m=3):
        """Assemble operators, transfers and smoother plans for ``meshes``."""
        levels = []
        for mesh in meshes:
            op = assemble_operator(mesh, alpha)
            plan = build_line_plan(mesh, op, ordering) if smoother == "line" else None
            levels.append(Level(mesh, op, plan))
        transfers = [build_transfer(c, f) for c, f in zip(meshes[:-1], meshes[1:])]
        return cls(levels, transfers, m, smoother)

    @property
    def J(self) -> int:
        return len(self.levels) - 1

    @property
    def A(self):
        """Finest-level flat operator."""
        return self.levels[-1].op.flat

    def smooth(self, k, x, b, direction):
        level = self.levels[k]
        if self.smoother == "line":
            line_gs_sweep(level.op.flat, level.plan, x, b, direction)
        else:
            point_gs_sweep(level.op.flat, x, b, direction)


def vcycle_apply(h: MgHierarchy, k: int, r, m: int | None = None) -> np.ndarray:
    """Approximate solution of ``A_k e = r`` by one symmetric V-cycle.

    Exact solve on level 0; otherwise ``m`` forward sweeps from zero, coarse
    correction with the restricted residual, ``m`` backward sweeps.
    """
    m = h.m if m is None else m
    r = np.asarray(r, dtype=float)
    if k == 0:
        return scipy.linalg.cho_solve(h.coarse_factor, r)
    A = h.levels[k].op.flat
    u = np.zeros_like(r)
    for _ in range(m):
        h.smooth(k, u, r, FORWARD)
    T = h.transfers[k - 1]
    u += T.prolong(vcycle_apply(h, k - 1, T.restrict(r - A @ u), m))
    for _ in range(m):
        h.smooth(k, u, r, BACKWARD)
    return u


@dataclass
class SolveReport:
    iterations: int
    residual_history: list[float]
    contraction_estimate: float
    wall_time: float
    converged: bool = True
    config: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "iterations": self.iterations,
            "residuals": list(self.residual_history),
            "contraction": self.contraction_estimate,
            "wall_time_s": self.wall_time,
            "converged": self.converged,
            "config": self.config,
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


class MultigridFailure(RuntimeError):
    """Solve did not reach the tolerance; ``report`` carries the history."""

    def __init__(self, msg, report: SolveReport):
        super().__init__(msg)
        self.report = report


class DivergenceError(MultigridFailure):
    pass


class MaxIterationsError(MultigridFailure):
    pass


def _rate(history):
    if len(history) < 2 or history[0] == 0:
        return 0.0
    k = len(history) - 1
    return float((history[-1] / history[0]) ** (1.0 / k))


def mg_solve(h: MgHierarchy, b, tol=1e-7, max_iter=200, x0=None, config=None):
    """Iterate ``x <- x + MG(b - A x)`` until ``||b - A x|| / ||b|| <= tol``.

    Returns ``(x, SolveReport)``. Raises :class:`MaxIterationsError` after
    ``max_iter`` cycles and :class:`DivergenceError` after three consecutive
    residual increases.
    """
    A = h.A
    b = np.asarray(b, dtype=float)
    x = np.zeros_like(b) if x0 is None else np.array(x0, dtype=float)
    config = dict(config or {})
    t0 = time.perf_counter()
    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        x[:] = 0.0
        return x, SolveReport(0, [], 0.0, time.perf_counter() - t0, True, config)
    res = np.linalg.norm(b - A @ x) / bnorm
    history = [res]
    increases = 0
    it = 0
    while res > tol:
        if it >= max_iter:
            report = SolveReport(it, history, _rate(history), time.perf_counter() - t0,
                                 False, config)
            raise MaxIterationsError(f"no convergence within {max_iter} iterations", report)
        x += vcycle_apply(h, h.J, b - A @ x)
        it += 1
        new = np.linalg.norm(b - A @ x) / bnorm
        increases = increases + 1 if new > res else 0
        res = new
        history.append(res)
        if increases >= 3 or not np.isfinite(res):
            report = SolveReport(it, history, _rate(history), time.perf_counter() - t0,
                                 False, config)
            raise DivergenceError("residual increased for 3 consecutive iterations", report)
    return x, SolveReport(it, history, _rate(history), time.perf_counter() - t0, True, config)


def estimate_contraction(h: MgHierarchy, cycles=15, seed=0) -> float:
    """Measured energy-norm contraction of the V-cycle iteration.

    Iterates on ``A x = 0`` from a random initial guess, so the iterate is the
    error, and returns ``(||x_k||_A / ||x_0||_A)**(1/k)``.
    """
    A = h.A
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(A.shape[0])
    x /= np.linalg.norm(x)
    e0 = np.sqrt(x @ (A @ x))
    for _ in range(cycles):
        x += vcycle_apply(h, h.J, -(A @ x))
    ek = np.sqrt(max(x @ (A @ x), 0.0))
    return float((ek / e0) ** (1.0 / cycles))
