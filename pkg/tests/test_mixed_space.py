import numpy as np
import pytest

from fracflow.mesh import build_mesh
from fracflow.mixed_space import (
    DiscreteState,
    SpaceError,
    basis_values,
    build_single_domain_space,
    build_space,
    divergence,
    evaluate_flux,
    flux_values,
    interpolate,
    trace_values,
)
from fracflow.quadrature import DEG4_BARY, gauss_interval

from conftest import DOMAIN


def test_dof_counts(space42, mesh42):
    e1 = len(np.unique(mesh42.triangle_edges[mesh42.triangles_of(1)]))
    e2 = len(np.unique(mesh42.triangle_edges[mesh42.triangles_of(2)]))
    assert space42.n_flux == e1 + e2 + len(mesh42.fracture_segments) + 1
    assert space42.n_pressure == mesh42.n_triangles + len(mesh42.fracture_segments)
    assert len(set(space42.frac_dofs1) & set(space42.frac_dofs2)) == 0


def test_basis_unit_edge_flux(space42):
    """Basis k carries unit flux (along the edge's reference normal) through
    edge k and none through the other edges of the triangle."""
    m = space42.mesh
    s, w = gauss_interval(3)
    for t in range(m.n_triangles):
        p = m.vertices[m.triangles[t]]
        for j in range(3):
            e = m.triangle_edges[t, j]
            a, b = m.vertices[m.edges[e]]
            pts = a + s[:, None] * (b - a)
            lam = np.linalg.solve(
                np.vstack([np.ones(3), p.T]), np.vstack([np.ones(len(s)), pts.T])
            ).T
            phi = basis_values(space42, lam, [t])[0]  # (q, k, d)
            flux = (phi @ m.edge_normals[e]) * w[:, None] * m.edge_lengths[e]
            total = flux.sum(axis=0)
            expected = np.zeros(3)
            expected[j] = 1.0
            assert np.allclose(total, expected, atol=1e-13)


def test_interpolation_reproduces_constants(space42):
    u = interpolate(space42, lambda sub, x, y: (np.full_like(x, 2.0), np.full_like(x, -1.0)))
    vals = flux_values(space42, u, DEG4_BARY)
    assert np.allclose(vals[..., 0], 2.0) and np.allclose(vals[..., 1], -1.0)
    assert np.allclose(divergence(space42, u), 0.0, atol=1e-13)
    t1, t2 = trace_values(space42, u)
    assert np.allclose(t1, 2.0) and np.allclose(t2, 2.0)


def test_interpolation_divergence_of_linear_field(space42):
    u = interpolate(space42, lambda sub, x, y: (x, 2 * y))
    assert np.allclose(divergence(space42, u), 3.0)


def test_evaluate_flux(space42):
    u = interpolate(space42, lambda sub, x, y: (np.ones_like(x), np.zeros_like(x)))
    c = space42.mesh.centroids[0]
    assert np.allclose(evaluate_flux(space42, DiscreteState(u, np.zeros(space42.n_pressure)), 0, c), [1, 0])
    with pytest.raises(SpaceError):
        evaluate_flux(space42, u, 0, [5.0, 5.0])


def test_space_builders():
    single = build_mesh(DOMAIN, None, 2, 2)
    with pytest.raises(SpaceError):
        build_space(single)
    sp1 = build_single_domain_space(single)
    assert sp1.n_segments == 0 and len(sp1.gamma_dofs) == 0
    with pytest.raises(SpaceError):
        build_single_domain_space(build_mesh(DOMAIN, 1.0, 2, 2))


def test_state_check(space42):
    s = DiscreteState.zeros(space42)
    s.check(space42)
    with pytest.raises(SpaceError):
        DiscreteState(np.zeros(3), s.p).check(space42)
