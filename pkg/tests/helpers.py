"""Independent oracles shared by several test modules."""

import numpy as np

from fracmg.meshes import FracParams, build_hierarchy, make_grading


def make_meshes(s=0.6, kind="original", J=2, nx0=4, dim=1):
    p = FracParams(s)
    return p, build_hierarchy(p, make_grading(kind, p.gamma), J, nx0, dim)


def graded_gauss(a, b, func, order=64, levels=200):
    """Composite Gauss-Legendre quadrature of ``func`` on [a, b].

    The interval is split geometrically towards ``a`` so that integrands with
    a y**alpha singularity at 0 <= a are resolved; the dropped sliver has
    length (b - a) * 2**-levels.
    """
    t, w = np.polynomial.legendre.leggauss(order)
    cuts = a + (b - a) * 0.5 ** np.arange(levels + 1)
    pieces = [(cuts[i + 1], cuts[i]) for i in range(levels)]
    total = 0.0
    for lo, hi in pieces:
        y = 0.5 * (hi - lo) * t + 0.5 * (hi + lo)
        total += 0.5 * (hi - lo) * np.sum(w * func(y))
    return total


def quadrature_axis_matrices(points, alpha):
    """Dense weighted 1D P1 mass/stiffness by composite Gauss per element."""
    n = len(points)
    M = np.zeros((n, n))
    S = np.zeros((n, n))
    for e in range(n - 1):
        a, b = points[e], points[e + 1]
        h = b - a
        phis = [lambda y: (b - y) / h, lambda y: (y - a) / h]
        dphis = [-1.0 / h, 1.0 / h]
        for i in range(2):
            for j in range(2):
                M[e + i, e + j] += graded_gauss(a, b, lambda y: y**alpha * phis[i](y) * phis[j](y))
                S[e + i, e + j] += dphis[i] * dphis[j] * graded_gauss(a, b, lambda y: y**alpha)
    return M, S


def brute_force_operator(mesh, alpha):
    """Element-by-element Q1 assembly of int y**alpha grad u . grad v on the
    full vertex grid, followed by Dirichlet elimination. Dense; small meshes.

    Vertex ordering matches the package: y fastest, Omega lexicographic.
    """
    nx, M, n = mesh.nx, mesh.M, mesh.dim_omega
    ys = mesh.axis.points
    xs = np.linspace(0, 1, nx + 1)
    gx, gw = np.polynomial.legendre.leggauss(3)
    nv_om = (nx + 1) ** n
    N = nv_om * (M + 1)
    K = np.zeros((N, N))

    def vid(om, l):
        idx = 0
        for i in om:
            idx = idx * (nx + 1) + i
        return idx * (M + 1) + l

    om_elems = [(i,) for i in range(nx)] if n == 1 else [(i, j) for i in range(nx) for j in range(nx)]
    for oe in om_elems:
        for l in range(M):
            a, b = ys[l], ys[l + 1]
            hy = b - a
            corners = []
            for off_om in ([(0,), (1,)] if n == 1 else [(0, 0), (0, 1), (1, 0), (1, 1)]):
                for dl in (0, 1):
                    corners.append((tuple(o + d for o, d in zip(oe, off_om)), off_om, dl))
            # local integrals: x-part by 3-pt Gauss (exact for products of linears),
            # y-part by graded composite Gauss with the weight
            for (om_i, oi, li) in corners:
                for (om_j, oj, lj) in corners:
                    val = 0.0
                    # gradient component along each Omega direction d and along y
                    for comp in range(n + 1):
                        fx = 1.0
                        for d in range(n):
                            h = 1.0 / nx
                            x0 = xs[oe[d]]
                            xq = x0 + h * 0.5 * (gx + 1)
                            wq = 0.5 * h * gw
                            def basis(x, o):
                                return (x - x0) / h if o == 1 else (x0 + h - x) / h
                            def dbasis(o):
                                return 1.0 / h if o == 1 else -1.0 / h
                            if comp == d:
                                fx *= dbasis(oi[d]) * dbasis(oj[d]) * h
                            else:
                                fx *= np.sum(wq * basis(xq, oi[d]) * basis(xq, oj[d]))
                        def by(y, o):
                            return (y - a) / hy if o == 1 else (b - y) / hy
                        if comp == n:
                            gy = (1 if li else -1) * (1 if lj else -1) / hy**2
                            fy = gy * graded_gauss(a, b, lambda y: y**alpha, order=32)
                        else:
                            fy = graded_gauss(a, b, lambda y: y**alpha * by(y, li) * by(y, lj), order=32)
                        val += fx * fy
                    K[vid(om_i, l + li), vid(om_j, l + lj)] += val
    keep = []
    grid = [(i,) for i in range(nx + 1)] if n == 1 else [(i, j) for i in range(nx + 1) for j in range(nx + 1)]
    for om in grid:
        for l in range(M + 1):
            if all(0 < i < nx for i in om) and l < M:
                keep.append(vid(om, l))
    keep = np.array(keep)
    return K[np.ix_(keep, keep)]


def dense_block_gs(A, blocks, x, b):
    for idx in blocks:
        x[idx] += np.linalg.solve(A[np.ix_(idx, idx)], b[idx] - A[idx] @ x)
    return x


def dense_vcycle(As, Ps, blocks, k, r, m):
    """Textbook symmetric V-cycle with dense matrices and dense block solves."""
    if k == 0:
        return np.linalg.solve(As[0], r)
    A = As[k]
    u = np.zeros_like(r)
    for _ in range(m):
        u = dense_block_gs(A, blocks[k], u, r)
    u = u + Ps[k - 1] @ dense_vcycle(As, Ps, blocks, k - 1, Ps[k - 1].T @ (r - A @ u), m)
    for _ in range(m):
        u = dense_block_gs(A, blocks[k][::-1], u, r)
    return u
