"""Fracture-conforming triangulations of a rectangle.

The rectangle is cut by a vertical line ``x = fracture_x`` into a left
subdomain (tag 1) and a right subdomain (tag 2).  Every triangle lies on one
side of the line and the fracture is the union of the mesh edges lying on it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

INTERIOR = 0
BOUNDARY = 1
FRACTURE = 2

_SNAP_TOL = 1e-9


class MeshError(ValueError):
    """Raised for invalid mesh construction input."""


@dataclass(frozen=True)
class Rectangle:
    x0: float
    x1: float
    y0: float
    y1: float

    @property
    def width(self) -> float:
        return self.x1 - self.x0

    @property
    def height(self) -> float:
        return self.y1 - self.y0

    @property
    def area(self) -> float:
        return self.width * self.height


def _frozen(a):
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Mesh:
    """Immutable triangulation with subdomain, boundary and fracture tags.

    Attributes
    ----------
    vertices : (nv, 2) float array
    triangles : (nt, 3) int array, counter-clockwise
    subdomain : (nt,) int array with values in {1, 2}
    edges : (ne, 2) int array, vertex pairs sorted ascending
    edge_kind : (ne,) int array, one of INTERIOR, BOUNDARY, FRACTURE
    edge_subdomain : (ne,) int array, owning subdomain (0 for fracture edges)
    edge_triangles : (ne, 2) int array, adjacent triangles (-1 if absent)
    triangle_edges : (nt, 3) int array, local edge k is opposite local vertex k
    edge_normals : (ne, 2) float array, reference unit normal of every edge
    fracture_segments : (nf,) int array, fracture edges ordered bottom to top
    fracture_vertices : (nf + 1,) int array, fracture vertices bottom to top
    """

    domain: Rectangle
    fracture_x: float | None
    vertices: np.ndarray
    triangles: np.ndarray
    subdomain: np.ndarray
    edges: np.ndarray
    edge_kind: np.ndarray
    edge_subdomain: np.ndarray
    edge_triangles: np.ndarray
    triangle_edges: np.ndarray
    edge_normals: np.ndarray
    fracture_segments: np.ndarray
    fracture_vertices: np.ndarray

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def has_fracture(self) -> bool:
        return len(self.fracture_segments) > 0

    @property
    def fracture_endpoints(self) -> tuple[int, int]:
        if not self.has_fracture:
            raise MeshError("mesh has no fracture")
        return int(self.fracture_vertices[0]), int(self.fracture_vertices[-1])

    @property
    def edge_lengths(self) -> np.ndarray:
        d = self.vertices[self.edges[:, 1]] - self.vertices[self.edges[:, 0]]
        return np.hypot(d[:, 0], d[:, 1])

    @property
    def edge_midpoints(self) -> np.ndarray:
        return 0.5 * (self.vertices[self.edges[:, 0]] + self.vertices[self.edges[:, 1]])

    @property
    def h(self) -> float:
        return float(self.edge_lengths.max())

    @property
    def areas(self) -> np.ndarray:
        p = self.vertices[self.triangles]
        e1 = p[:, 1] - p[:, 0]
        e2 = p[:, 2] - p[:, 0]
        return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])

    @property
    def centroids(self) -> np.ndarray:
        return self.vertices[self.triangles].mean(axis=1)

    def triangles_of(self, sub: int) -> np.ndarray:
        return np.flatnonzero(self.subdomain == sub)

    def boundary_edges(self, sub: int | None = None) -> np.ndarray:
        """Boundary edge indices, optionally restricted to one subdomain."""
        mask = self.edge_kind == BOUNDARY
        if sub is not None:
            mask &= self.edge_subdomain == sub
        return np.flatnonzero(mask)

    def segment_lengths(self) -> np.ndarray:
        return self.edge_lengths[self.fracture_segments]

    def fracture_y(self) -> np.ndarray:
        """y coordinates of the fracture vertices, bottom to top."""
        return self.vertices[self.fracture_vertices, 1]


def _check_domain(domain) -> Rectangle:
    if not isinstance(domain, Rectangle):
        domain = Rectangle(*map(float, domain))
    if not (domain.width > 0 and domain.height > 0):
        raise MeshError(f"degenerate domain extents {domain}: width and height must be positive")
    return domain


def build_mesh(domain, fracture_x: float | None, nx: int, ny: int) -> Mesh:
    """Structured triangulation of ``domain`` with every cell cut along the
    lower-left to upper-right diagonal.

    ``fracture_x`` must lie strictly inside the x-extent and on a grid line
    (within ``1e-9 * width``, in which case it is snapped).  ``None`` gives a
    single-domain mesh with no fracture, used by the single-domain limit
    studies.
    """
    domain = _check_domain(domain)
    if int(nx) != nx or int(ny) != ny or nx < 1 or ny < 1:
        raise MeshError(f"nx, ny must be integers >= 1, got nx={nx}, ny={ny}")
    nx, ny = int(nx), int(ny)
    xs = np.linspace(domain.x0, domain.x1, nx + 1)
    ys = np.linspace(domain.y0, domain.y1, ny + 1)

    if fracture_x is not None:
        fracture_x = float(fracture_x)
        if not domain.x0 < fracture_x < domain.x1:
            raise MeshError(
                f"fracture_x={fracture_x} outside the open interval ({domain.x0}, {domain.x1})"
            )
        k = int(np.argmin(np.abs(xs - fracture_x)))
        if abs(xs[k] - fracture_x) > _SNAP_TOL * domain.width:
            raise MeshError(
                f"fracture_x={fracture_x} does not coincide with a grid line of an nx={nx} grid"
            )
        fracture_x = float(xs[k])

    X, Y = np.meshgrid(xs, ys)
    vertices = np.column_stack([X.ravel(), Y.ravel()])
    i, j = np.meshgrid(np.arange(nx), np.arange(ny))
    v00 = (j * (nx + 1) + i).ravel()
    v10 = v00 + 1
    v01 = v00 + nx + 1
    v11 = v01 + 1
    triangles = np.empty((2 * nx * ny, 3), dtype=np.int64)
    triangles[0::2] = np.column_stack([v00, v10, v11])
    triangles[1::2] = np.column_stack([v00, v11, v01])
    return _assemble(domain, fracture_x, vertices, triangles, _tag(vertices, triangles, fracture_x))


def _tag(vertices, triangles, fracture_x):
    if fracture_x is None:
        return np.ones(len(triangles), dtype=np.int64)
    cx = vertices[triangles, 0].mean(axis=1)
    return np.where(cx < fracture_x, 1, 2).astype(np.int64)


def refine(mesh: Mesh) -> Mesh:
    """Uniform red refinement: every triangle is split into four similar
    children through its edge midpoints.  Tags are inherited."""
    nv = mesh.n_vertices
    vertices = np.vstack([mesh.vertices, mesh.edge_midpoints])
    t = mesh.triangles
    te = mesh.triangle_edges
    a, b, c = t[:, 0], t[:, 1], t[:, 2]
    # local edge k is opposite vertex k
    m_bc, m_ca, m_ab = nv + te[:, 0], nv + te[:, 1], nv + te[:, 2]
    children = np.stack(
        [
            np.column_stack([a, m_ab, m_ca]),
            np.column_stack([m_ab, b, m_bc]),
            np.column_stack([m_ca, m_bc, c]),
            np.column_stack([m_ab, m_bc, m_ca]),
        ],
        axis=1,
    ).reshape(-1, 3)
    sub = np.repeat(mesh.subdomain, 4)
    return _assemble(mesh.domain, mesh.fracture_x, vertices, children, sub)


def _assemble(domain, fracture_x, vertices, triangles, subdomain) -> Mesh:
    nt = len(triangles)
    local = np.array([[1, 2], [2, 0], [0, 1]])
    pairs = np.sort(triangles[:, local].reshape(-1, 2), axis=1)
    edges, inverse = np.unique(pairs, axis=0, return_inverse=True)
    inverse = inverse.ravel()
    triangle_edges = inverse.reshape(nt, 3)
    ne = len(edges)

    edge_triangles = np.full((ne, 2), -1, dtype=np.int64)
    owner = np.repeat(np.arange(nt), 3)
    order = np.argsort(inverse, kind="stable")
    counts = np.bincount(inverse, minlength=ne)
    if counts.max() > 2:
        raise MeshError("non-manifold triangulation: an edge is shared by more than two triangles")
    starts = np.concatenate([[0], np.cumsum(counts)[:-1]])
    edge_triangles[:, 0] = owner[order[starts]]
    two = counts == 2
    edge_triangles[two, 1] = owner[order[starts[two] + 1]]

    t0, t1 = edge_triangles[:, 0], edge_triangles[:, 1]
    s0 = subdomain[t0]
    s1 = np.where(t1 >= 0, subdomain[np.maximum(t1, 0)], s0)
    edge_kind = np.where(t1 < 0, BOUNDARY, np.where(s0 != s1, FRACTURE, INTERIOR))
    edge_subdomain = np.where(edge_kind == FRACTURE, 0, s0)

    # reference normals: rotated tangent for interior edges, outward on the
    # boundary, +x across the fracture (pointing from subdomain 1 into 2)
    d = vertices[edges[:, 1]] - vertices[edges[:, 0]]
    length = np.hypot(d[:, 0], d[:, 1])
    normals = np.column_stack([d[:, 1], -d[:, 0]]) / length[:, None]
    mid = 0.5 * (vertices[edges[:, 0]] + vertices[edges[:, 1]])
    cen = vertices[triangles].mean(axis=1)
    bd = edge_kind == BOUNDARY
    out = np.einsum("ij,ij->i", normals, mid - cen[t0]) < 0
    normals[bd & out] *= -1.0
    fr = edge_kind == FRACTURE
    normals[fr] = np.sign(normals[fr, 0:1]) * normals[fr]

    fracture_segments = np.flatnonzero(fr)
    fracture_vertices = np.empty(0, dtype=np.int64)
    if len(fracture_segments):
        fracture_segments = fracture_segments[np.argsort(mid[fracture_segments, 1], kind="stable")]
        fracture_vertices = _chain(edges[fracture_segments], vertices)

    return Mesh(
        domain=domain,
        fracture_x=fracture_x,
        vertices=_frozen(vertices.astype(float)),
        triangles=_frozen(triangles.astype(np.int64)),
        subdomain=_frozen(subdomain.astype(np.int64)),
        edges=_frozen(edges.astype(np.int64)),
        edge_kind=_frozen(edge_kind.astype(np.int64)),
        edge_subdomain=_frozen(edge_subdomain.astype(np.int64)),
        edge_triangles=_frozen(edge_triangles),
        triangle_edges=_frozen(triangle_edges.astype(np.int64)),
        edge_normals=_frozen(normals),
        fracture_segments=_frozen(fracture_segments.astype(np.int64)),
        fracture_vertices=_frozen(fracture_vertices.astype(np.int64)),
    )


def _chain(seg_edges, vertices):
    # segments sorted by midpoint y; consecutive ones must share a vertex
    lo = np.where(
        vertices[seg_edges[:, 0], 1] < vertices[seg_edges[:, 1], 1], seg_edges[:, 0], seg_edges[:, 1]
    )
    hi = np.where(lo == seg_edges[:, 0], seg_edges[:, 1], seg_edges[:, 0])
    if np.any(hi[:-1] != lo[1:]):
        raise MeshError("fracture edges do not form a single connected polyline")
    return np.concatenate([lo[:1], hi])


def check_invariants(mesh: Mesh) -> list[str]:
    """Return a list of broken mesh invariants (empty when the mesh is valid)."""
    problems = []
    if np.any(mesh.areas <= 0):
        problems.append("non-positive triangle area")
    total = mesh.areas.sum()
    if abs(total - mesh.domain.area) > 1e-12 * mesh.domain.area:
        problems.append(f"triangle areas sum to {total}, domain area {mesh.domain.area}")
    n_adj = (mesh.edge_triangles >= 0).sum(axis=1)
    if np.any(n_adj[mesh.edge_kind == BOUNDARY] != 1):
        problems.append("boundary edge not on exactly one triangle")
    if np.any(n_adj[mesh.edge_kind != BOUNDARY] != 2):
        problems.append("interior or fracture edge not on exactly two triangles")
    if mesh.fracture_x is not None:
        cx = mesh.centroids[:, 0]
        left = mesh.subdomain == 1
        if np.any(cx[left] >= mesh.fracture_x) or np.any(cx[~left] <= mesh.fracture_x):
            problems.append("triangle on the wrong side of the fracture")
        v = mesh.vertices[mesh.triangles, 0]
        crosses = (v.min(axis=1) < mesh.fracture_x - 1e-12) & (v.max(axis=1) > mesh.fracture_x + 1e-12)
        if np.any(crosses):
            problems.append("triangle crosses the fracture")
        fs = mesh.fracture_segments
        if len(fs) == 0:
            problems.append("fracture has no edges")
        else:
            if np.any(mesh.edge_normals[fs, 0] <= 0):
                problems.append("fracture normal does not point from subdomain 1 into 2")
            subs = np.sort(mesh.subdomain[mesh.edge_triangles[fs]], axis=1)
            if np.any(subs != [1, 2]):
                problems.append("fracture edge not shared by one triangle of each subdomain")
            y = mesh.fracture_y()
            if not (np.isclose(y[0], mesh.domain.y0) and np.isclose(y[-1], mesh.domain.y1)):
                problems.append("fracture does not span the domain height")
    return problems
