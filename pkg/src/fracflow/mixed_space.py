"""Lowest-order face elements for fluxes and piecewise constants for
pressures, on both subdomains and on the fracture.

Flux unknowns are total fluxes through edges, measured along the mesh's
reference edge normal.  Fracture edges carry two independent unknowns, one per
side; both use the fracture normal (pointing from subdomain 1 into 2), so they
are the traces ``u1.n`` and ``u2.n`` integrated over the edge.  The
tangential fracture flux is continuous and piecewise linear along the
fracture, one unknown per fracture vertex.

Ordering: subdomain-1 edge fluxes, subdomain-2 edge fluxes, fracture vertex
fluxes; then triangle pressures, then fracture segment pressures.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mesh import Mesh
from .quadrature import gauss_interval


class SpaceError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class MixedSpace:
    mesh: Mesh
    n_flux: int
    n_pressure: int
    sub_edges: dict  # subdomain -> sorted edge indices
    sub_offset: dict  # subdomain -> first flux dof
    tri_dofs: np.ndarray  # (nt, 3)
    tri_signs: np.ndarray  # (nt, 3), +1 where the reference normal is outward
    frac_dofs1: np.ndarray  # (nf,)
    frac_dofs2: np.ndarray  # (nf,)
    gamma_dofs: np.ndarray  # (nf + 1,)
    boundary_dofs: dict  # subdomain -> dofs aligned with mesh.boundary_edges(i)

    @property
    def n_dofs(self) -> int:
        return self.n_flux + self.n_pressure

    @property
    def n_triangles(self) -> int:
        return self.mesh.n_triangles

    @property
    def n_segments(self) -> int:
        return len(self.mesh.fracture_segments)

    @property
    def segment_pressure_dofs(self) -> np.ndarray:
        return self.mesh.n_triangles + np.arange(self.n_segments)

    def edge_dof(self, sub: int, edge: int) -> int:
        edges = self.sub_edges[sub]
        k = int(np.searchsorted(edges, edge))
        if k >= len(edges) or edges[k] != edge:
            raise SpaceError(f"edge {edge} does not belong to subdomain {sub}")
        return self.sub_offset[sub] + k


@dataclass
class DiscreteState:
    u: np.ndarray
    p: np.ndarray

    @classmethod
    def zeros(cls, space: MixedSpace) -> "DiscreteState":
        return cls(np.zeros(space.n_flux), np.zeros(space.n_pressure))

    def copy(self) -> "DiscreteState":
        return DiscreteState(self.u.copy(), self.p.copy())

    def check(self, space: MixedSpace):
        if self.u.shape != (space.n_flux,) or self.p.shape != (space.n_pressure,):
            raise SpaceError(
                f"state sizes ({self.u.shape}, {self.p.shape}) do not match "
                f"space ({space.n_flux}, {space.n_pressure})"
            )


def _build(mesh: Mesh) -> MixedSpace:
    nt = mesh.n_triangles
    sub_edges, sub_offset = {}, {}
    offset = 0
    for sub in (1, 2):
        tris = mesh.triangles_of(sub)
        edges = np.unique(mesh.triangle_edges[tris]) if len(tris) else np.empty(0, dtype=np.int64)
        sub_edges[sub] = edges
        sub_offset[sub] = offset
        offset += len(edges)
    nf = len(mesh.fracture_segments)
    n_gamma = nf + 1 if nf else 0
    gamma_dofs = offset + np.arange(n_gamma)
    n_flux = offset + n_gamma

    tri_dofs = np.empty((nt, 3), dtype=np.int64)
    for sub in (1, 2):
        tris = mesh.triangles_of(sub)
        if len(tris):
            tri_dofs[tris] = sub_offset[sub] + np.searchsorted(sub_edges[sub], mesh.triangle_edges[tris])

    # sign +1 when the reference normal of the edge points out of the triangle
    p = mesh.vertices[mesh.triangles]
    cen = p.mean(axis=1)
    mid = mesh.edge_midpoints[mesh.triangle_edges]
    nrm = mesh.edge_normals[mesh.triangle_edges]
    tri_signs = np.where(np.einsum("tkd,tkd->tk", nrm, mid - cen[:, None, :]) > 0, 1.0, -1.0)

    segs = mesh.fracture_segments
    frac1 = np.array([sub_offset[1] + np.searchsorted(sub_edges[1], e) for e in segs], dtype=np.int64)
    frac2 = np.array([sub_offset[2] + np.searchsorted(sub_edges[2], e) for e in segs], dtype=np.int64)
    bdofs = {
        sub: sub_offset[sub] + np.searchsorted(sub_edges[sub], mesh.boundary_edges(sub))
        for sub in (1, 2)
    }
    return MixedSpace(
        mesh=mesh,
        n_flux=n_flux,
        n_pressure=nt + nf,
        sub_edges=sub_edges,
        sub_offset=sub_offset,
        tri_dofs=tri_dofs,
        tri_signs=tri_signs,
        frac_dofs1=frac1,
        frac_dofs2=frac2,
        gamma_dofs=gamma_dofs,
        boundary_dofs=bdofs,
    )


def build_space(mesh: Mesh) -> MixedSpace:
    """Mixed space on a fractured mesh.  The fracture must be nonempty."""
    if not mesh.has_fracture:
        raise SpaceError("the model requires a nonempty fracture; use build_single_domain_space")
    return _build(mesh)


def build_single_domain_space(mesh: Mesh) -> MixedSpace:
    """Mixed space on a mesh without fracture (single-domain studies)."""
    if mesh.has_fracture:
        raise SpaceError("mesh has a fracture; use build_space")
    return _build(mesh)


# basis evaluation


def basis_values(space: MixedSpace, bary: np.ndarray, triangles=None) -> np.ndarray:
    """Face-element basis functions at barycentric points.

    Returns shape (nt, nq, 3, 2): basis of local edge k at point q.
    """
    mesh = space.mesh
    tris = np.arange(mesh.n_triangles) if triangles is None else np.atleast_1d(triangles)
    p = mesh.vertices[mesh.triangles[tris]]  # (nt, 3, 2)
    area = mesh.areas[tris]
    x = np.einsum("qk,tkd->tqd", bary, p)
    diff = x[:, :, None, :] - p[:, None, :, :]  # x - P_k
    scale = space.tri_signs[tris] / (2.0 * area[:, None])
    return diff * scale[:, None, :, None]


def flux_values(space: MixedSpace, u: np.ndarray, bary: np.ndarray) -> np.ndarray:
    """Subdomain flux field at barycentric points, shape (nt, nq, 2)."""
    phi = basis_values(space, bary)
    c = u[space.tri_dofs]
    return np.einsum("tqkd,tk->tqd", phi, c)


def divergence(space: MixedSpace, u: np.ndarray) -> np.ndarray:
    """Piecewise-constant divergence on every triangle."""
    net = (space.tri_signs * u[space.tri_dofs]).sum(axis=1)
    return net / space.mesh.areas


def _barycentric(p, x):
    T = np.column_stack([p[1] - p[0], p[2] - p[0]])
    l12 = np.linalg.solve(T, np.asarray(x, dtype=float) - p[0])
    return np.array([1.0 - l12.sum(), l12[0], l12[1]])


def evaluate_flux(space: MixedSpace, state, triangle: int, point) -> np.ndarray:
    """Velocity of the discrete flux at a point of one triangle."""
    u = state.u if isinstance(state, DiscreteState) else np.asarray(state)
    p = space.mesh.vertices[space.mesh.triangles[triangle]]
    lam = _barycentric(p, point)
    if lam.min() < -1e-12:
        raise SpaceError(f"point {tuple(point)} lies outside triangle {triangle}")
    return flux_values_at(space, u, triangle, lam)


def flux_values_at(space, u, triangle, lam):
    phi = basis_values(space, lam[None, :], [triangle])[0, 0]
    return phi.T @ u[space.tri_dofs[triangle]]


def gamma_flux_values(space: MixedSpace, u: np.ndarray, s: np.ndarray) -> np.ndarray:
    """Tangential fracture flux at local coordinates ``s`` in [0, 1] of every
    segment (bottom to top), shape (nf, ns)."""
    g = u[space.gamma_dofs]
    return g[:-1, None] * (1.0 - s)[None, :] + g[1:, None] * s[None, :]


# interpolation


def interpolate(space: MixedSpace, field, gamma_field=None, order: int = 6) -> np.ndarray:
    """Canonical interpolant: edge fluxes of a vector field and point values of
    the tangential fracture flux.

    ``field(sub, x, y)`` returns the two velocity components on subdomain
    ``sub``; ``gamma_field(y)`` the tangential flux on the fracture.
    """
    mesh = space.mesh
    s, w = gauss_interval(order)
    a = mesh.vertices[mesh.edges[:, 0]]
    b = mesh.vertices[mesh.edges[:, 1]]
    L = mesh.edge_lengths
    u = np.zeros(space.n_flux)
    for sub in (1, 2):
        edges = space.sub_edges[sub]
        if not len(edges):
            continue
        pts = a[edges, None, :] + s[None, :, None] * (b - a)[edges, None, :]
        vx, vy = field(sub, pts[..., 0], pts[..., 1])
        vn = vx * mesh.edge_normals[edges, 0, None] + vy * mesh.edge_normals[edges, 1, None]
        u[space.sub_offset[sub] + np.arange(len(edges))] = (vn * w).sum(axis=1) * L[edges]
    if len(space.gamma_dofs) and gamma_field is not None:
        u[space.gamma_dofs] = gamma_field(mesh.fracture_y())
    return u


def trace_values(space: MixedSpace, u: np.ndarray):
    """Normal traces ``u1.n`` and ``u2.n`` (constant per fracture segment)."""
    L = space.mesh.segment_lengths()
    return u[space.frac_dofs1] / L, u[space.frac_dofs2] / L


__all__ = [
    "DiscreteState",
    "MixedSpace",
    "SpaceError",
    "basis_values",
    "build_single_domain_space",
    "build_space",
    "divergence",
    "evaluate_flux",
    "flux_values",
    "gamma_flux_values",
    "interpolate",
    "trace_values",
]
