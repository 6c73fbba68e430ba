"""Energy errors against the exact extension energy and spectral measurements."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .assembly import WeightedOperator, element_moments, normalization_constant

__all__ = [
    "ExactProblem",
    "exact_energy_sq",
    "energy_error",
    "convergence_rate",
    "rayleigh_bounds",
    "spectral_equivalence_report",
    "inverse_inequality_constants",
]


@dataclass(frozen=True)
class ExactProblem:
    """Test problem with a single Dirichlet eigenfunction as exact solution.

    n = 1: ``u = sin(3 pi x)``; n = 2: ``u = sin(2 pi x1) sin(2 pi x2)``.
    The right-hand side is ``f = lambda**s * u``.
    """

    dim_omega: int
    s: float
    mode: tuple = field(init=False)
    lam: float = field(init=False)
    coef_sq: float = field(init=False)

    def __post_init__(self):
        if self.dim_omega == 1:
            mode, lam, c2 = (3,), 9.0 * math.pi**2, 0.5
        elif self.dim_omega == 2:
            mode, lam, c2 = (2, 2), 8.0 * math.pi**2, 0.25
        else:
            raise ValueError("only n = 1 or 2")
        if not 0.0 < self.s < 1.0:
            raise ValueError("s must lie in (0, 1)")
        object.__setattr__(self, "mode", mode)
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "coef_sq", c2)

    @property
    def d_s(self) -> float:
        return normalization_constant(self.s)

    @property
    def hs_norm_sq(self) -> float:
        """``||u||^2`` in the fractional space: ``lambda**s * coef_sq``."""
        return self.lam**self.s * self.coef_sq

    def u(self, *x):
        out = 1.0
        for k, xi in zip(self.mode, x):
            out = out * np.sin(k * np.pi * np.asarray(xi))
        return out

    def f(self, *x):
        return self.lam**self.s * self.u(*x)


def exact_energy_sq(p: ExactProblem) -> float:
    """Squared weighted energy of the exact extension: ``d_s lambda**s c**2``."""
    return p.d_s * p.hs_norm_sq


def energy_error(p: ExactProblem, A, x, tol: float = 1e-8) -> float:
    """Energy-norm error of a Galerkin solution ``x``.

    Uses ``a(U - V, U - V) = a(U, U) - a(V, V)``, valid for the exact Galerkin
    solution. A negative radicand beyond ``-tol * a(U, U)`` raises ValueError.
    """
    mat = A.flat if isinstance(A, WeightedOperator) else A
    x = np.asarray(x, dtype=float)
    exact = exact_energy_sq(p)
    diff = exact - float(x @ (mat @ x))
    if diff < -tol * exact:
        raise ValueError(f"discrete energy exceeds exact energy by {-diff:.3e}; "
                         "inconsistent load normalization or assembly")
    return math.sqrt(max(diff, 0.0))


def convergence_rate(errors) -> list[float]:
    """Ratios ``E_k / E_{k+1}`` of consecutive errors."""
    errors = [float(e) for e in errors]
    if len(errors) < 2:
        raise ValueError("need at least two levels")
    if any(e == 0 for e in errors):
        raise ValueError("zero error entry")
    return [a / b for a, b in zip(errors[:-1], errors[1:])]


def rayleigh_bounds(M, n_random=100, power_iters=300, seed=0):
    """Estimated extremal values of ``x^T M x / x^T D x``, ``D = diag(M)``.

    Random trial vectors give a first bracket; power iteration on the
    diagonally scaled matrix (and on its shifted complement for the lower end)
    refines it. Both values are Rayleigh quotients, so the true spectrum
    interval contains the returned one.
    """
    M = sp.csr_matrix(M)
    d = M.diagonal()
    if np.any(d <= 0):
        raise ValueError("diagonal must be positive")
    dis = 1.0 / np.sqrt(d)
    B = sp.diags(dis) @ M @ sp.diags(dis)
    n = M.shape[0]
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, n_random))
    q = np.einsum("ij,ij->j", X, B @ X) / np.einsum("ij,ij->j", X, X)
    lo, hi = q.min(), q.max()

    v = rng.standard_normal(n)
    for _ in range(power_iters):
        v = B @ v
        v /= np.linalg.norm(v)
    hi = max(hi, v @ (B @ v))
    w = rng.standard_normal(n)
    for _ in range(power_iters):
        w = hi * w - B @ w
        w /= np.linalg.norm(w)
    lo = min(lo, w @ (B @ w))
    return float(lo), float(hi)


def spectral_equivalence_report(levels, **kw) -> list[tuple[float, float]]:
    """Per-level Rayleigh bounds of the weighted mass against its diagonal.

    ``levels`` holds :class:`WeightedOperator` objects, objects with an ``op``
    attribute (hierarchy levels), or sparse mass matrices.
    """
    out = []
    for lv in levels:
        op = getattr(lv, "op", lv)
        M = op.mass if isinstance(op, WeightedOperator) else op
        out.append(rayleigh_bounds(M, **kw))
    return out


def inverse_inequality_constants(points, alpha) -> np.ndarray:
    """``h**2 * lambda_max`` of the weighted element pencil (stiffness, mass)
    for every element of a 1D mesh.

    The element stiffness is ``k v v^T`` with ``v = (1, -1)``, so
    ``lambda_max = k v^T M^{-1} v``.
    """
    points = np.asarray(points, dtype=float)
    a, h = points[:-1], np.diff(points)
    I0, I1, I2 = element_moments(a, h, alpha)
    ll, lr, rr = h * (I0 - 2 * I1 + I2), h * (I1 - I2), h * I2
    det = ll * rr - lr**2
    # v^T M^{-1} v for v = (1, -1)
    vMv = (rr + ll + 2 * lr) / det
    k = I0 / h
    return h**2 * k * vMv
