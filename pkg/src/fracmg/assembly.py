"""Weighted Q1 stiffness operator on tensor meshes and the trace load.

The bilinear form ``int y**alpha grad(u) . grad(v)`` separates on a tensor
mesh, so the global operator is a Kronecker sum of 1D factors::

    A = S_omega (x) M_y + M_omega (x) S_y

with ``M_y``/``S_y`` the y**alpha-weighted 1D mass/stiffness matrices. Weighted
element integrals are evaluated in closed form (no quadrature), which keeps the
Galerkin relation between nested levels exact up to rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.io
import scipy.sparse as sp

from .meshes import GradedAxis, TensorMesh

__all__ = [
    "weighted_moment",
    "element_moments",
    "Axis1DMatrices",
    "assemble_axis_matrices",
    "uniform_p1_matrices",
    "WeightedOperator",
    "assemble_operator",
    "normalization_constant",
    "LoadVector",
    "assemble_load",
    "energy_inner",
    "write_matrix_market",
]

# binomial series is used for elements with h/a below this ratio
_SERIES_RATIO = 0.5
_SERIES_TERMS = 64


def weighted_moment(a: float, b: float, alpha: float, k: int) -> float:
    """``int_a^b y**(alpha + k) dy`` for ``0 <= a < b``."""
    if a < 0 or not b > a:
        raise ValueError(f"need 0 <= a < b, got a={a}, b={b}")
    if k not in (0, 1, 2):
        raise ValueError("k must be 0, 1 or 2")
    p = alpha + k + 1.0
    return (b**p - a**p) / p


def element_moments(a, h, alpha):
    """Normalized element moments ``I_k = int_0^1 (a + h t)**alpha t**k dt``.

    Vectorized over elements ``[a, a + h]``. Uses the antiderivative directly
    when the element is close to the origin (``a <= 2h``) and a binomial series
    in ``h/a`` otherwise, which avoids cancellation for elements far from
    ``y = 0``.

    Returns
    -------
    ndarray, shape (3, n_elements)
    """
    a = np.atleast_1d(np.asarray(a, dtype=float))
    h = np.atleast_1d(np.asarray(h, dtype=float))
    out = np.empty((3, a.size))
    near = a <= h / _SERIES_RATIO
    if np.any(near):
        an, hn = a[near], h[near]
        bn = an + hn
        m = [(bn ** (alpha + k + 1) - an ** (alpha + k + 1)) / (alpha + k + 1) for k in range(3)]
        out[0, near] = m[0] / hn
        out[1, near] = (m[1] - an * m[0]) / hn**2
        out[2, near] = (m[2] - 2 * an * m[1] + an**2 * m[0]) / hn**3
    far = ~near
    if np.any(far):
        af, r = a[far], h[far] / a[far]
        j = np.arange(_SERIES_TERMS)
        # binom(alpha, j) by the product recursion
        coef = np.ones(_SERIES_TERMS)
        for i in range(1, _SERIES_TERMS):
            coef[i] = coef[i - 1] * (alpha - i + 1) / i
        rj = r[:, None] ** j[None, :]
        for k in range(3):
            out[k, far] = af**alpha * (rj * (coef / (j + k + 1))).sum(axis=1)
    return out


@dataclass(frozen=True)
class Axis1DMatrices:
    """1D factors over all axis vertices (boundary vertices included)."""

    mass_w: sp.csr_matrix
    stiff_w: sp.csr_matrix
    mass_x: sp.csr_matrix
    stiff_x: sp.csr_matrix


def _tridiag_from_local(ll, lr, rr):
    """Assemble a P1 tridiagonal matrix from per-element 2x2 blocks."""
    n = ll.size + 1
    diag = np.zeros(n)
    diag[:-1] += ll
    diag[1:] += rr
    return sp.diags([lr, diag, lr], [-1, 0, 1], format="csr")


def weighted_axis_factors(points, alpha):
    """Weighted mass and stiffness over all vertices of a 1D mesh."""
    points = np.asarray(points, dtype=float)
    a = points[:-1]
    h = np.diff(points)
    I0, I1, I2 = element_moments(a, h, alpha)
    mass = _tridiag_from_local(h * (I0 - 2 * I1 + I2), h * (I1 - I2), h * I2)
    k = I0 / h
    stiff = _tridiag_from_local(k, -k, k)
    return mass, stiff


def uniform_p1_matrices(nx: int):
    """Unweighted P1 mass and stiffness on the uniform grid of [0, 1]."""
    return weighted_axis_factors(np.linspace(0.0, 1.0, nx + 1), 0.0)


def assemble_axis_matrices(axis: GradedAxis, alpha: float, nx: int | None = None) -> Axis1DMatrices:
    """Weighted y factors on ``axis`` and unweighted factors on the Omega grid.

    The Omega grid has ``nx`` intervals, ``axis.M`` by default.
    """
    mass_w, stiff_w = weighted_axis_factors(axis.points, alpha)
    mass_x, stiff_x = uniform_p1_matrices(axis.M if nx is None else nx)
    return Axis1DMatrices(mass_w, stiff_w, mass_x, stiff_x)


@dataclass(frozen=True)
class WeightedOperator:
    """Weighted stiffness on the unknowns, factored and flat.

    ``A = kron(S_omega, M_y) + kron(M_omega, S_y)``; all four factors are
    already restricted to unknowns.
    """

    S_omega: sp.csr_matrix
    M_omega: sp.csr_matrix
    S_y: sp.csr_matrix
    M_y: sp.csr_matrix
    flat: sp.csr_matrix
    mesh: TensorMesh

    @property
    def shape(self):
        return self.flat.shape

    def __matmul__(self, x):
        return self.flat @ x

    def apply_kron(self, x):
        """Apply ``A`` through the Kronecker factors."""
        X = np.asarray(x).reshape(self.S_omega.shape[0], self.M_y.shape[0])
        out = self.S_omega @ (self.M_y @ X.T).T + self.M_omega @ (self.S_y @ X.T).T
        return out.reshape(-1)

    @property
    def mass(self) -> sp.csr_matrix:
        """Full weighted mass ``kron(M_omega, M_y)`` on the unknowns."""
        return sp.kron(self.M_omega, self.M_y, format="csr")


def assemble_operator(mesh: TensorMesh, alpha: float) -> WeightedOperator:
    """Assemble the weighted stiffness operator with Dirichlet elimination.

    Dirichlet vertices (lateral boundary and top) are dropped symmetrically;
    the bottom plane ``y = 0`` keeps its unknowns.
    """
    if mesh.n_unknowns == 0:
        raise ValueError("mesh has no unknowns")
    fac = assemble_axis_matrices(mesh.axis, alpha, mesh.nx)
    inner = slice(1, mesh.nx)
    Mx = fac.mass_x[inner, inner].tocsr()
    Sx = fac.stiff_x[inner, inner].tocsr()
    keep_y = slice(0, mesh.M)
    My = fac.mass_w[keep_y, keep_y].tocsr()
    Sy = fac.stiff_w[keep_y, keep_y].tocsr()
    if mesh.dim_omega == 1:
        S_om, M_om = Sx, Mx
    else:
        S_om = (sp.kron(Sx, Mx) + sp.kron(Mx, Sx)).tocsr()
        M_om = sp.kron(Mx, Mx, format="csr")
    flat = (sp.kron(S_om, My) + sp.kron(M_om, Sy)).tocsr()
    # kron may go through dense blocks and keep explicit zeros
    for mat in (S_om, M_om, flat):
        mat.eliminate_zeros()
        mat.sort_indices()
    return WeightedOperator(S_om, M_om, Sy, My, flat, mesh)


def normalization_constant(s: float) -> float:
    """``d_s = 2**(1 - 2s) * Gamma(1 - s) / Gamma(s)``."""
    if not 0.0 < s < 1.0:
        raise ValueError("s must lie in (0, 1)")
    return 2.0 ** (1.0 - 2.0 * s) * math.gamma(1.0 - s) / math.gamma(s)


@dataclass(frozen=True)
class LoadVector:
    values: np.ndarray
    d_s: float


def _trace_basis_quadrature(nx: int, order: int = 5):
    """Quadrature points on [0, 1] and the matrix ``B`` with
    ``B[i, q] = w_q * phi_i(x_q)`` for interior hat functions ``phi_i``."""
    t, w = np.polynomial.legendre.leggauss(order)
    t = 0.5 * (t + 1.0)
    w = 0.5 * w
    h = 1.0 / nx
    left = np.arange(nx) * h
    xq = (left[:, None] + h * t[None, :]).ravel()
    B = np.zeros((nx + 1, nx * order))
    for e in range(nx):
        cols = slice(e * order, (e + 1) * order)
        B[e, cols] = h * w * (1.0 - t)
        B[e + 1, cols] = h * w * t
    return xq, B[1:nx]


def assemble_load(mesh: TensorMesh, s: float, f) -> LoadVector:
    """Load ``d_s * int_Omega f * phi_i`` on the bottom unknowns (5-point Gauss
    per element and direction); zero on all other unknowns.

    ``f`` takes one array argument for n = 1 and two for n = 2.
    """
    d_s = normalization_constant(s)
    xq, B = _trace_basis_quadrature(mesh.nx)
    if mesh.dim_omega == 1:
        trace = B @ np.asarray(f(xq), dtype=float)
    else:
        X1, X2 = np.meshgrid(xq, xq, indexing="ij")
        F = np.broadcast_to(np.asarray(f(X1, X2), dtype=float), X1.shape)
        trace = (B @ F @ B.T).ravel()
    values = np.zeros((mesh.n_lines, mesh.M))
    values[:, 0] = d_s * trace
    return LoadVector(values.ravel(), d_s)


def energy_inner(A, u, v) -> float:
    """``u^T A v``; the energy norm is ``sqrt(energy_inner(A, u, u))``."""
    mat = A.flat if isinstance(A, WeightedOperator) else A
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != (mat.shape[0],) or v.shape != (mat.shape[1],):
        raise ValueError(f"vector sizes {u.shape}, {v.shape} do not match operator {mat.shape}")
    return float(u @ (mat @ v))


def write_matrix_market(directory, op: WeightedOperator, load: LoadVector | None = None,
                        prefix: str = "A") -> list[Path]:
    """Export ``op.flat`` (symmetric coordinate format) and optionally the load."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = [directory / f"{prefix}.mtx"]
    scipy.io.mmwrite(paths[0], op.flat, symmetry="symmetric", precision=17)
    if load is not None:
        paths.append(directory / f"{prefix}_load.mtx")
        scipy.io.mmwrite(paths[1], load.values[:, None], precision=17)
    return paths
