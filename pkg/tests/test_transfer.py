import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings, strategies as st

from fracmg.assembly import assemble_operator
from fracmg.meshes import GradingMap, TensorMesh, build_axis
from fracmg.transfer import build_transfer, interpolation_1d

from helpers import make_meshes


def test_midpoint_weights_uniform():
    P = interpolation_1d(np.linspace(0, 1, 3), np.linspace(0, 1, 5)).toarray()
    # interior fine vertices 1..3, interior coarse vertex 1
    np.testing.assert_array_equal(P, [[0.5], [1.0], [0.5]])


def test_graded_theta_gamma2():
    c = build_axis(GradingMap("original", 2.0), 2).points   # 0, 1/4, 1
    f = build_axis(GradingMap("original", 2.0), 4).points   # 0, 1/16, 1/4, 9/16, 1
    P = interpolation_1d(c, f, keep_last=True).toarray()
    # fine point 9/16 lies at theta = (9/16 - 1/4) / (3/4) = 5/12 between 1/4 and 1
    np.testing.assert_allclose(P[1], [0.75, 0.25], rtol=1e-15)   # 1/16 between 0 and 1/4
    np.testing.assert_allclose(P[3], [0.0, 1 - 5 / 12], rtol=1e-15)
    np.testing.assert_array_equal(P[[0, 2]], [[1, 0], [0, 1]])


@settings(max_examples=40, deadline=None)
@given(gamma=st.floats(1.0, 11.0), M=st.integers(1, 64),
       kind=st.sampled_from(["original", "modified"]))
def test_y_interpolation_reproduces_linears(gamma, M, kind):
    g = GradingMap(kind, gamma, xi_star=0.75 if kind == "modified" else None)
    c, f = build_axis(g, M).points, build_axis(g, 2 * M).points
    P = interpolation_1d(c, f, keep_last=True)
    # 1 - y vanishes at the Dirichlet top, so P reproduces it exactly
    np.testing.assert_allclose(P @ (1 - c[:-1]), 1 - f[:-1], atol=1e-14)
    # interior-stencil rows reproduce constants and y
    rows = np.arange(1, 2 * M - 1)
    Pd = P.toarray()
    np.testing.assert_allclose(Pd[rows].sum(axis=1), 1, atol=1e-14)
    np.testing.assert_allclose(Pd[rows] @ c[:-1], f[rows], atol=1e-14)
    assert np.all(Pd >= 0)


def test_non_nested_rejected():
    with pytest.raises(ValueError):
        interpolation_1d(np.linspace(0, 1, 3), np.linspace(0, 1, 6))
    with pytest.raises(ValueError):
        interpolation_1d([0, 0.5, 1], [0, 0.2, 0.45, 0.7, 1])
    m4 = TensorMesh(1, 4, build_axis(GradingMap(), 4))
    m16 = TensorMesh(1, 16, build_axis(GradingMap(), 16))
    with pytest.raises(ValueError):
        build_transfer(m4, m16)


@pytest.mark.parametrize("dim", [1, 2])
def test_transfer_structure(dim):
    _, (c, f) = make_meshes(0.3, "original", 1, 4, dim)
    T = build_transfer(c, f)
    assert T.P.shape == (f.n_unknowns, c.n_unknowns)
    assert abs(T.R - T.P.T).max() == 0
    nnz = np.diff(T.P.indptr)
    assert nnz.max() <= 2 ** (dim + 1) and nnz.min() >= 1
    r = np.arange(f.n_unknowns, dtype=float)
    np.testing.assert_array_equal(T.restrict(r), T.P.T @ r)


@pytest.mark.parametrize("dim", [1, 2])
def test_partition_of_unity_interior_rows(dim):
    _, (c, f) = make_meshes(0.15, "modified", 1, 4, dim)
    P = build_transfer(c, f).P.toarray()
    coords = f.unknown_coords()
    h = 1 / c.nx
    # rows whose coarse stencil stays away from Dirichlet vertices
    far = np.all((coords[:, :dim] > h) & (coords[:, :dim] < 1 - h), axis=1)
    far &= coords[:, dim] < c.axis.points[-2]
    assert far.any()
    np.testing.assert_allclose(P[far].sum(axis=1), 1, atol=1e-14)


def _galerkin_error(c, f, alpha):
    Ac = assemble_operator(c, alpha).flat
    Af = assemble_operator(f, alpha).flat
    P = build_transfer(c, f).P
    G = (P.T @ Af @ P).tocsr()
    return abs(G - Ac).max() / abs(Ac).max()


@pytest.mark.parametrize("s", [0.15, 0.3, 0.6, 0.8])
@pytest.mark.parametrize("kind", ["original", "modified", "uniform"])
def test_galerkin_identity_1d(s, kind):
    p, meshes = make_meshes(s, kind, 3, 4, 1)
    for c, f in zip(meshes[:-1], meshes[1:]):
        assert _galerkin_error(c, f, p.alpha) <= 1e-12


@pytest.mark.parametrize("s,kind", [(0.15, "original"), (0.3, "modified"), (0.8, "original")])
def test_galerkin_identity_2d(s, kind):
    p, meshes = make_meshes(s, kind, 2, 4, 2)
    for c, f in zip(meshes[:-1], meshes[1:]):
        assert _galerkin_error(c, f, p.alpha) <= 1e-12


def test_prolongation_is_nodal_interpolation():
    # a coarse finite element function evaluated at fine vertices
    _, (c, f) = make_meshes(0.6, "original", 1, 4, 1)
    Px = interpolation_1d(c.x, f.x)
    Py = interpolation_1d(c.axis.points, f.axis.points, keep_last=True)
    P = build_transfer(c, f).P
    assert abs(P - sp.kron(Px, Py)).max() == 0
    cc = c.unknown_coords()
    u = np.sin(np.pi * cc[:, 0]) * (1 - cc[:, 1])
    fc = f.unknown_coords()
    # bilinear in (x, y) inside a coarse cell: check at fine vertices that are coarse vertices
    on_coarse = np.isin(np.round(fc[:, 0] * c.nx, 12) % 1, [0]) & np.isin(fc[:, 1], c.axis.points)
    expect = np.sin(np.pi * fc[on_coarse, 0]) * (1 - fc[on_coarse, 1])
    np.testing.assert_allclose((P @ u)[on_coarse], expect, atol=1e-14)
