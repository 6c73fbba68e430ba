"""Graded axes, tensor-product meshes and nested hierarchies.

The extended direction y is discretized by mapping a uniform grid of (0, 1)
through a grading map ``F``; the Omega directions use uniform grids. Vertices
are ordered with y fastest, so each vertical line is a contiguous block.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

logger = logging.getLogger(__name__)

__all__ = [
    "FracParams",
    "GradingMap",
    "GradedAxis",
    "TensorMesh",
    "default_gamma",
    "make_grading",
    "modified_map_params",
    "build_axis",
    "build_hierarchy",
    "estimate_a2_constant",
    "export_mesh",
]


def default_gamma(s: float) -> float:
    """Grading exponent used in the experiments, ``3/(2s) + 0.1``."""
    return 3.0 / (2.0 * s) + 0.1


@dataclass(frozen=True)
class FracParams:
    """Fractional order and the derived weight/grading exponents.

    ``alpha = 1 - 2s`` is the exponent of the weight ``y**alpha``. ``gamma``
    defaults to ``3/(2s) + 0.1`` and is stored, not recomputed.
    """

    s: float
    gamma: float | None = None
    Y: float = 1.0
    alpha: float = field(init=False)

    def __post_init__(self):
        if not 0.0 < self.s < 1.0:
            raise ValueError(f"s must lie in (0, 1), got {self.s}")
        if self.Y <= 0:
            raise ValueError("Y must be positive")
        object.__setattr__(self, "alpha", 1.0 - 2.0 * self.s)
        if self.gamma is None:
            object.__setattr__(self, "gamma", default_gamma(self.s))
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")

    @property
    def satisfies_grading_condition(self) -> bool:
        """Whether ``gamma > 3/(1 - alpha)``, the condition for optimal rates."""
        return self.gamma > 3.0 / (1.0 - self.alpha)


def modified_map_params(gamma: float, xi_star: float, Y: float = 1.0):
    """Transition ordinate and maximal slope of the modified grading map.

    ``y_star`` is chosen so that the power branch and the linear branch have
    equal slope at ``xi_star``.

    Returns
    -------
    y_star : float
    max_slope : float
        ``max |F'| = gamma * Y * y_star / xi_star``.
    """
    if gamma < 1:
        raise ValueError("modified grading needs gamma >= 1")
    if not 0.0 < xi_star < 1.0:
        raise ValueError("xi_star must lie in (0, 1)")
    y_star = 1.0 / (1.0 + gamma * (1.0 - xi_star) / xi_star)
    return y_star, gamma * Y * y_star / xi_star


@dataclass(frozen=True)
class GradingMap:
    """Map ``F: [0, 1] -> [0, Y]`` turning a uniform grid into a graded one.

    ``kind="original"`` is the power map ``Y * xi**gamma``; ``kind="modified"``
    uses that shape up to ``xi_star`` and continues linearly to ``(1, Y)``.
    """

    kind: str = "original"
    gamma: float = 1.0
    Y: float = 1.0
    xi_star: float | None = None
    y_star: float | None = field(default=None, init=False)

    def __post_init__(self):
        if self.kind not in ("original", "modified"):
            raise ValueError(f"unknown grading kind {self.kind!r}")
        if self.gamma <= 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if self.Y <= 0:
            raise ValueError("Y must be positive")
        if self.kind == "modified":
            if self.xi_star is None:
                object.__setattr__(self, "xi_star", 0.75)
            y_star, _ = modified_map_params(self.gamma, self.xi_star, self.Y)
            object.__setattr__(self, "y_star", y_star)

    def __call__(self, xi):
        xi = np.asarray(xi, dtype=float)
        if self.kind == "original":
            return self.Y * xi**self.gamma
        xs, ys = self.xi_star, self.y_star
        power = ys * self.Y * (np.minimum(xi, xs) / xs) ** self.gamma
        linear = self.Y * ((1.0 - ys) / (1.0 - xs) * (xi - xs) + ys)
        return np.where(xi <= xs, power, linear)

    def derivative(self, xi):
        xi = np.asarray(xi, dtype=float)
        if self.kind == "original":
            return self.gamma * self.Y * xi ** (self.gamma - 1.0)
        xs, ys = self.xi_star, self.y_star
        power = self.gamma * self.Y * ys / xs * (np.minimum(xi, xs) / xs) ** (self.gamma - 1.0)
        linear = np.full_like(xi, self.Y * (1.0 - ys) / (1.0 - xs))
        return np.where(xi <= xs, power, linear)

    @property
    def max_slope(self) -> float:
        if self.kind == "original":
            return self.Y * max(self.gamma, 1.0) if self.gamma >= 1 else math.inf
        return self.gamma * self.Y * self.y_star / self.xi_star


def make_grading(kind: str, gamma: float, Y: float = 1.0, xi_star: float = 0.75) -> GradingMap:
    """Grading map for an experiment.

    ``kind`` is ``"original"``, ``"modified"`` or ``"uniform"``. The modified
    map is only used for ``gamma > 4``; otherwise the original map is returned.
    """
    if kind == "uniform":
        return GradingMap("original", 1.0, Y)
    if kind == "modified":
        if gamma > 4:
            return GradingMap("modified", gamma, Y, xi_star)
        logger.info("gamma=%g <= 4: modified grading not applied, using original", gamma)
        return GradingMap("original", gamma, Y)
    return GradingMap(kind, gamma, Y)


@dataclass(frozen=True)
class GradedAxis:
    """Ordinates ``0 = y_0 < ... < y_M = Y`` with ``y_l = F(l/M)``."""

    points: np.ndarray
    map: GradingMap
    M: int

    @property
    def sizes(self) -> np.ndarray:
        return np.diff(self.points)


def build_axis(map: GradingMap, M: int) -> GradedAxis:
    """Evaluate ``map`` on the uniform grid ``l/M``, ``l = 0..M``."""
    if int(M) != M or M < 1:
        raise ValueError(f"M must be a positive integer, got {M}")
    M = int(M)
    xi = np.arange(M + 1) / M
    pts = np.asarray(map(xi), dtype=float)
    # pin the endpoints exactly
    pts[0] = 0.0
    pts[-1] = map.Y
    if np.any(np.diff(pts) <= 0):
        raise ValueError("grading map produced a non-increasing axis")
    pts.setflags(write=False)
    return GradedAxis(pts, map, M)


@dataclass(frozen=True)
class TensorMesh:
    """Uniform grid on the unit interval/square times a graded y axis.

    Dirichlet vertices are the lateral boundary and the top ``y = Y``. Unknowns
    are numbered with y fastest: ``omega_index * M + l`` for ``l = 0..M-1``,
    where ``omega_index`` enumerates interior Omega vertices lexicographically
    (last coordinate fastest).
    """

    dim_omega: int
    nx: int
    axis: GradedAxis

    def __post_init__(self):
        if self.dim_omega not in (1, 2):
            raise ValueError("only n = 1 or 2 is supported")
        if self.nx < 2:
            raise ValueError("nx must be >= 2 so that Omega has interior vertices")

    @property
    def h(self) -> float:
        return 1.0 / self.nx

    @property
    def M(self) -> int:
        return self.axis.M

    @property
    def vertex_count(self) -> int:
        return (self.nx + 1) ** self.dim_omega * (self.M + 1)

    @property
    def n_lines(self) -> int:
        return (self.nx - 1) ** self.dim_omega

    @property
    def n_unknowns(self) -> int:
        return self.n_lines * self.M

    @property
    def x(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.nx + 1)

    def line_coords(self) -> np.ndarray:
        """Lattice coordinates (1..nx-1) of the interior Omega vertex of each line."""
        inner = np.arange(1, self.nx)
        if self.dim_omega == 1:
            return inner[:, None]
        i1, i2 = np.meshgrid(inner, inner, indexing="ij")
        return np.column_stack([i1.ravel(), i2.ravel()])

    def dof_index(self, omega: Sequence[int], l: int) -> int:
        """Unknown index of the vertex with Omega lattice coords ``omega`` and
        y-index ``l``; ``-1`` if the vertex carries a Dirichlet condition."""
        omega = tuple(int(i) for i in np.atleast_1d(omega))
        if len(omega) != self.dim_omega:
            raise ValueError("wrong number of Omega coordinates")
        if any(i <= 0 or i >= self.nx for i in omega) or l < 0 or l >= self.M:
            return -1
        line = 0
        for i in omega:
            line = line * (self.nx - 1) + (i - 1)
        return line * self.M + l

    def unknown_coords(self) -> np.ndarray:
        """Physical coordinates ``(x..., y)`` of every unknown, in unknown order."""
        xs = self.line_coords() / self.nx
        ys = self.axis.points[:-1]
        xs_rep = np.repeat(xs, self.M, axis=0)
        ys_rep = np.tile(ys, self.n_lines)
        return np.column_stack([xs_rep, ys_rep])

    def refine(self) -> "TensorMesh":
        """Next level: ``nx`` and ``M`` doubled, same grading map."""
        return TensorMesh(self.dim_omega, 2 * self.nx, build_axis(self.axis.map, 2 * self.M))


def build_hierarchy(params: FracParams | None, map: GradingMap, J: int,
                    nx0: int = 4, dim: int = 1) -> list[TensorMesh]:
    """Nested meshes ``nx = nx0 * 2**k`` with ``M = nx``, coarse to fine.

    ``params`` is accepted for symmetry with the experiment configuration; the
    grading lives entirely in ``map``.
    """
    if nx0 < 2:
        raise ValueError("nx0 must be >= 2: coarsest system would be empty/singular")
    if J < 0:
        raise ValueError("J must be non-negative")
    if params is not None and abs(params.Y - map.Y) > 0:
        raise ValueError("params.Y and map.Y disagree")
    meshes = [TensorMesh(dim, nx0, build_axis(map, nx0))]
    for _ in range(J):
        meshes.append(meshes[-1].refine())
    return meshes


def _abs_power_integral(a: float, b: float, p: float) -> float:
    """Integral of ``|y|**p`` over ``(a, b)`` for ``p > -1``."""
    def prim(y):
        return math.copysign(abs(y) ** (p + 1.0), y) / (p + 1.0)
    return prim(b) - prim(a)


def estimate_a2_constant(alpha: float, intervals: Iterable[tuple[float, float]]) -> float:
    """Lower bound on the A2 constant of ``|y|**alpha`` over a finite family.

    Returns the maximum over the intervals of
    ``avg(|y|**alpha) * avg(|y|**-alpha)``; averages use exact antiderivatives.
    """
    if not -1.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (-1, 1)")
    best = -math.inf
    for a, b in intervals:
        if not b > a:
            raise ValueError(f"interval ({a}, {b}) has non-positive length")
        length = b - a
        w = _abs_power_integral(a, b, alpha) / length
        winv = _abs_power_integral(a, b, -alpha) / length
        best = max(best, w * winv)
    if best == -math.inf:
        raise ValueError("empty interval family")
    return best


def export_mesh(mesh: TensorMesh, path) -> None:
    """Write all grid vertices as text, one per line.

    Format: ``index x_1 [x_2] y dof`` where ``dof`` is the unknown index or
    ``-1`` for Dirichlet vertices. Vertices follow the y-fastest ordering over
    the full (nx+1)^n x (M+1) grid.
    """
    x = mesh.x
    y = mesh.axis.points
    with open(path, "w") as fh:
        fh.write(f"# dim={mesh.dim_omega} nx={mesh.nx} M={mesh.M} "
                 f"vertices={mesh.vertex_count}\n")
        idx = 0
        if mesh.dim_omega == 1:
            grid = [(i,) for i in range(mesh.nx + 1)]
        else:
            grid = [(i, j) for i in range(mesh.nx + 1) for j in range(mesh.nx + 1)]
        for om in grid:
            xs = " ".join(f"{x[i]:.17g}" for i in om)
            for l in range(mesh.M + 1):
                fh.write(f"{idx} {xs} {y[l]:.17g} {mesh.dof_index(om, l)}\n")
                idx += 1
