"""Point and vertical-line Gauss-Seidel sweeps.

Sweeps work in place on CSR data through numba kernels. A vertical line is
the contiguous block of unknowns above one interior Omega vertex; its diagonal
block is tridiagonal and is factored once (Thomas algorithm) per level.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np
import scipy.sparse as sp

__all__ = [
    "SmootherError",
    "Tridiag",
    "tridiag_solve",
    "LinePlan",
    "build_line_plan",
    "point_gs_sweep",
    "line_gs_sweep",
    "line_update",
]

FORWARD = "forward"
BACKWARD = "backward"


class SmootherError(ArithmeticError):
    """Raised for zero pivots; ``line`` names the offending block if known."""

    def __init__(self, msg, line=None):
        super().__init__(msg)
        self.line = line


def _csr(A) -> sp.csr_matrix:
    A = getattr(A, "flat", A)
    if not sp.isspmatrix_csr(A):
        A = sp.csr_matrix(A)
    return A


def _check_direction(direction):
    if direction not in (FORWARD, BACKWARD):
        raise ValueError(f"direction must be 'forward' or 'backward', got {direction!r}")
    return direction == FORWARD


# -- tridiagonal systems ------------------------------------------------------

@dataclass
class Tridiag:
    """Tridiagonal matrix; ``sub[0]`` and ``sup[-1]`` are ignored.

    ``factor()`` stores the Thomas elimination: the pivots ``denom`` and the
    normalized super-diagonal ``cprime``.
    """

    sub: np.ndarray
    diag: np.ndarray
    sup: np.ndarray
    denom: np.ndarray | None = None
    cprime: np.ndarray | None = None

    @classmethod
    def from_matrix(cls, T):
        T = sp.dia_matrix(T) if sp.issparse(T) else np.asarray(T)
        dense = T.toarray() if sp.issparse(T) else T
        n = dense.shape[0]
        sub = np.zeros(n)
        sup = np.zeros(n)
        sub[1:] = np.diag(dense, -1)
        sup[:-1] = np.diag(dense, 1)
        return cls(sub, np.diag(dense).astype(float).copy(), sup)

    def toarray(self):
        return np.diag(self.diag) + np.diag(self.sub[1:], -1) + np.diag(self.sup[:-1], 1)

    def factor(self, line=None):
        denom, cprime = _thomas_factor(self.sub[None], self.diag[None], self.sup[None], line)
        self.denom, self.cprime = denom[0], cprime[0]
        return self


def _thomas_factor(sub, diag, sup, line_ids=None):
    """Batched Thomas factorization over rows of 2D arrays (one system per row)."""
    n_sys, n = diag.shape
    denom = np.empty_like(diag)
    cprime = np.zeros_like(diag)
    denom[:, 0] = diag[:, 0]
    for i in range(n):
        if i > 0:
            denom[:, i] = diag[:, i] - sub[:, i] * cprime[:, i - 1]
        bad = ~(np.abs(denom[:, i]) > 0)
        if np.any(bad):
            k = int(np.flatnonzero(bad)[0])
            line = k if line_ids is None else (line_ids if np.isscalar(line_ids) else line_ids[k])
            raise SmootherError(f"zero pivot in tridiagonal block {line} at row {i}", line)
        if i < n - 1:
            cprime[:, i] = sup[:, i] / denom[:, i]
    return denom, cprime


def tridiag_solve(T: Tridiag, b) -> np.ndarray:
    """Solve ``T x = b`` with the Thomas algorithm."""
    b = np.asarray(b, dtype=float)
    if b.shape != T.diag.shape:
        raise ValueError("right-hand side size does not match the matrix")
    if T.denom is None:
        T.factor()
    x = np.empty_like(b)
    _thomas_solve(T.sub, T.denom, T.cprime, b, x)
    return x


@numba.njit(cache=True)
def _thomas_solve(sub, denom, cprime, b, x):
    n = b.size
    x[0] = b[0] / denom[0]
    for i in range(1, n):
        x[i] = (b[i] - sub[i] * x[i - 1]) / denom[i]
    for i in range(n - 2, -1, -1):
        x[i] -= cprime[i] * x[i + 1]


# -- point Gauss-Seidel -------------------------------------------------------

@numba.njit(cache=True)
def _point_gs(indptr, indices, data, x, b, forward):
    n = b.size
    for step in range(n):
        i = step if forward else n - 1 - step
        acc = b[i]
        d = 0.0
        for k in range(indptr[i], indptr[i + 1]):
            j = indices[k]
            if j == i:
                d += data[k]
            else:
                acc -= data[k] * x[j]
        if d == 0.0:
            return i
        x[i] = acc / d
    return -1


def point_gs_sweep(A, x, b, direction=FORWARD):
    """One Gauss-Seidel sweep on ``A x = b`` updating ``x`` in place.

    ``"backward"`` visits unknowns in exactly the reverse order.
    """
    A = _csr(A)
    forward = _check_direction(direction)
    if x.dtype != np.float64 or not x.flags.c_contiguous:
        raise TypeError("x must be a contiguous float64 array (updated in place)")
    bad = _point_gs(A.indptr, A.indices, A.data, x, np.ascontiguousarray(b, dtype=float), forward)
    if bad >= 0:
        raise SmootherError(f"zero diagonal entry at row {bad}")
    return x


# -- line Gauss-Seidel --------------------------------------------------------

@dataclass(frozen=True)
class LinePlan:
    """Vertical-line blocks of one level and their factored diagonal blocks.

    Line ``j`` owns unknowns ``starts[j] : starts[j] + length``. ``order`` is
    the forward visiting order; backward sweeps use its reverse.
    """

    starts: np.ndarray
    length: int
    order: np.ndarray
    ordering: str
    sub: np.ndarray
    diag: np.ndarray
    sup: np.ndarray
    denom: np.ndarray
    cprime: np.ndarray

    @property
    def n_lines(self) -> int:
        return self.starts.size

    def block(self, j) -> np.ndarray:
        return np.arange(self.starts[j], self.starts[j] + self.length)

    def line_matrix(self, j) -> Tridiag:
        """Factored tridiagonal diagonal block of line ``j``."""
        return Tridiag(self.sub[j].copy(), self.diag[j].copy(), self.sup[j].copy(),
                       self.denom[j].copy(), self.cprime[j].copy())


def red_black_order(coords) -> np.ndarray:
    """Lines with even coordinate sum first, then odd; stable within a colour.

    ``coords`` are 0-based interior lattice coordinates, one row per line.
    """
    parity = np.asarray(coords).sum(axis=1) % 2
    return np.concatenate([np.flatnonzero(parity == 0), np.flatnonzero(parity == 1)])


def build_line_plan(mesh, A, ordering="redblack") -> LinePlan:
    """Extract and factor the vertical-line blocks of ``A`` on ``mesh``.

    ``ordering`` is ``"natural"`` or ``"redblack"``.
    """
    A = _csr(A)
    M = mesh.M
    n_lines = mesh.n_lines
    if A.shape != (n_lines * M, n_lines * M):
        raise ValueError("operator does not match mesh")
    starts = np.arange(n_lines) * M
    rows = np.arange(A.shape[0])
    line_of = rows // M
    coo = A.tocoo()
    same = line_of[coo.row] == line_of[coo.col]
    off = coo.col[same] - coo.row[same]
    if np.any(np.abs(off) > 1):
        raise ValueError("vertical line blocks are not contiguous tridiagonal blocks; "
                         "unknowns must be ordered with y fastest")
    sub = np.zeros((n_lines, M))
    diag = np.zeros((n_lines, M))
    sup = np.zeros((n_lines, M))
    r, v = coo.row[same], coo.data[same]
    loc = r % M
    for target, mask in ((diag, off == 0), (sub, off == -1), (sup, off == 1)):
        np.add.at(target, (line_of[r[mask]], loc[mask]), v[mask])
    denom, cprime = _thomas_factor(sub, diag, sup)
    if ordering == "natural":
        order = np.arange(n_lines)
    elif ordering == "redblack":
        order = red_black_order(mesh.line_coords() - 1)
    else:
        raise ValueError(f"unknown ordering {ordering!r}")
    return LinePlan(starts, M, order.astype(np.int64), ordering, sub, diag, sup, denom, cprime)


@numba.njit(cache=True)
def _line_gs(indptr, indices, data, x, b, starts, length, order, sub, denom, cprime, forward):
    r = np.empty(length)
    n_lines = order.size
    for step in range(n_lines):
        p = order[step] if forward else order[n_lines - 1 - step]
        s0 = starts[p]
        for q in range(length):
            i = s0 + q
            acc = b[i]
            for k in range(indptr[i], indptr[i + 1]):
                acc -= data[k] * x[indices[k]]
            r[q] = acc
        # Thomas solve with the cached factors
        r[0] = r[0] / denom[p, 0]
        for q in range(1, length):
            r[q] = (r[q] - sub[p, q] * r[q - 1]) / denom[p, q]
        for q in range(length - 2, -1, -1):
            r[q] -= cprime[p, q] * r[q + 1]
        for q in range(length):
            x[s0 + q] += r[q]


def line_gs_sweep(A, plan: LinePlan, x, b, direction=FORWARD):
    """One block Gauss-Seidel sweep over the vertical lines, in place.

    Each line update is ``x_line += A_line^{-1} (b - A x)_line`` with the
    factored tridiagonal block.
    """
    A = _csr(A)
    forward = _check_direction(direction)
    if x.dtype != np.float64 or not x.flags.c_contiguous:
        raise TypeError("x must be a contiguous float64 array (updated in place)")
    _line_gs(A.indptr, A.indices, A.data, x, np.ascontiguousarray(b, dtype=float),
             plan.starts, plan.length, plan.order, plan.sub, plan.denom, plan.cprime, forward)
    return x


def line_update(A, plan: LinePlan, x, b, j):
    """Update the single line ``j`` in place (reference path, no numba)."""
    A = _csr(A)
    idx = plan.block(j)
    r = b[idx] - A[idx] @ x
    x[idx] += tridiag_solve(plan.line_matrix(j), r)
    return x
