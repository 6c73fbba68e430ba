"""Prolongation/restriction between consecutive nested levels."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .meshes import TensorMesh

__all__ = ["TransferPair", "interpolation_1d", "build_transfer"]


def interpolation_1d(coarse_pts, fine_pts, keep_last: bool = False) -> sp.csr_matrix:
    """Nodal interpolation from a 1D P1 space into its uniform refinement.

    Points are the full vertex lists (boundary included). Both end vertices
    are Dirichlet, or only the last one with ``keep_last=True``. Rows and
    columns of Dirichlet vertices are removed; weights pointing at them are
    discarded, not renormalized.
    """
    coarse_pts = np.asarray(coarse_pts, dtype=float)
    fine_pts = np.asarray(fine_pts, dtype=float)
    nc = coarse_pts.size - 1
    nf = fine_pts.size - 1
    if nf != 2 * nc or not np.array_equal(fine_pts[::2], coarse_pts):
        raise ValueError("levels are not nested")
    rows, cols, vals = [], [], []
    for i in range(nf + 1):
        if i % 2 == 0:
            stencil = [(i // 2, 1.0)]
        else:
            L, R = (i - 1) // 2, (i + 1) // 2
            theta = (fine_pts[i] - coarse_pts[L]) / (coarse_pts[R] - coarse_pts[L])
            stencil = [(L, 1.0 - theta), (R, theta)]
        for j, w in stencil:
            rows.append(i)
            cols.append(j)
            vals.append(w)
    P = sp.csr_matrix((vals, (rows, cols)), shape=(nf + 1, nc + 1))
    lo = 0 if keep_last else 1
    P = P[lo:nf, lo:nc].tocsr()
    P.eliminate_zeros()
    return P


@dataclass(frozen=True)
class TransferPair:
    """Prolongation ``P = kron(P_omega, P_y)``; restriction is ``P.T``."""

    P_omega: sp.csr_matrix
    P_y: sp.csr_matrix
    P: sp.csr_matrix

    @cached_property
    def R(self) -> sp.csr_matrix:
        return self.P.T.tocsr()

    def prolong(self, v):
        return self.P @ v

    def restrict(self, r):
        return self.R @ r


def build_transfer(coarse: TensorMesh, fine: TensorMesh) -> TransferPair:
    """Grading-aware interpolation from ``coarse`` into ``fine``.

    Omega directions use midpoint averaging; along y the weight of a new point
    is its relative position between the two coarse neighbours.
    """
    if coarse.dim_omega != fine.dim_omega or fine.nx != 2 * coarse.nx:
        raise ValueError("fine mesh is not the refinement of coarse")
    Px = interpolation_1d(coarse.x, fine.x)
    Py = interpolation_1d(coarse.axis.points, fine.axis.points, keep_last=True)
    P_om = Px if coarse.dim_omega == 1 else sp.kron(Px, Px, format="csr")
    P = sp.kron(P_om, Py, format="csr")
    P.eliminate_zeros()
    P.sort_indices()
    return TransferPair(P_om, Py, P)
