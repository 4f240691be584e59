"""Hilbertian surrogate of the discrete inf-sup constant of the
jump-divergence form."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from ..assembly import _cell_mass, assemble_linear
from ..mesh import Rectangle, build_mesh
from ..mixed_space import MixedSpace, build_space
from ..problem_data import ProblemData

MAX_DENSE = 3000


class InfSupError(RuntimeError):
    pass


@dataclass(frozen=True)
class InfSupResult:
    nx: int
    ny: int
    h: float
    n_dofs: int
    theta: float
    lambda_min: float
    lambda_max: float


def flux_gram(space: MixedSpace) -> sp.csr_matrix:
    """Gram matrix of the flux norm: L^2 (matrix and fracture) + divergence
    (all entities) + normal traces on the fracture."""
    n = space.n_flux
    M = _cell_mass(space, np.broadcast_to(np.eye(2), (space.n_triangles, 2, 2)))
    B = assemble_linear(space, ProblemData.uniform()).B
    m = pressure_mass(space)
    M = M + (B.T @ sp.diags(1.0 / m) @ B)
    if space.n_segments:
        L = space.mesh.segment_lengths()
        g = space.gamma_dofs
        lo, hi = g[:-1], g[1:]
        rows = np.concatenate([lo, hi, lo, hi, space.frac_dofs1, space.frac_dofs2])
        cols = np.concatenate([lo, hi, hi, lo, space.frac_dofs1, space.frac_dofs2])
        vals = np.concatenate([L / 3, L / 3, L / 6, L / 6, 1.0 / L, 1.0 / L])
        M = M + sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
    return M.tocsr()


def pressure_mass(space: MixedSpace) -> np.ndarray:
    m = space.mesh.areas
    if space.n_segments:
        m = np.concatenate([m, space.mesh.segment_lengths()])
    return m


def infsup_constant(B, M_W, m_M, rel_zero: float = 1e-12):
    """sqrt of the smallest eigenvalue of  B M_W^{-1} B^T q = lam M_M q.

    Eigenvalues below ``rel_zero * lam_max`` count as zero, so a rank
    deficient B gives theta = 0.  Returns (theta, lam_min, lam_max).
    """
    B = B.toarray() if sp.issparse(B) else np.asarray(B, dtype=float)
    W = M_W.toarray() if sp.issparse(M_W) else np.asarray(M_W, dtype=float)
    if B.shape[0] + B.shape[1] > MAX_DENSE:
        raise InfSupError(f"{B.shape[0] + B.shape[1]} unknowns exceed the dense limit {MAX_DENSE}")
    try:
        c = sla.cho_factor(W)
        S = B @ sla.cho_solve(c, B.T)
        S = 0.5 * (S + S.T)
        lam = sla.eigh(S, np.diag(np.asarray(m_M, dtype=float)), eigvals_only=True)
    except (sla.LinAlgError, ValueError) as exc:
        raise InfSupError(f"eigen-solve failed: {exc}") from exc
    lmax = float(lam.max())
    lmin = float(lam.min())
    if lmin <= rel_zero * max(lmax, 0.0):
        return 0.0, max(lmin, 0.0), lmax
    return float(np.sqrt(lmin)), lmin, lmax


def discrete_infsup(space: MixedSpace) -> InfSupResult:
    B = assemble_linear(space, ProblemData.uniform()).B
    theta, lmin, lmax = infsup_constant(B, flux_gram(space), pressure_mass(space))
    mesh = space.mesh
    return InfSupResult(0, 0, mesh.h, space.n_dofs, theta, lmin, lmax)


def infsup_study(
    sizes=((2, 1), (4, 2), (8, 4)),
    domain: Rectangle = Rectangle(0.0, 2.0, 0.0, 1.0),
    fracture_x: float = 1.0,
) -> list[InfSupResult]:
    out = []
    for nx, ny in sizes:
        space = build_space(build_mesh(domain, fracture_x, nx, ny))
        r = discrete_infsup(space)
        out.append(InfSupResult(nx, ny, r.h, r.n_dofs, r.theta, r.lambda_min, r.lambda_max))
    return out
