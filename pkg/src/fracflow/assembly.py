"""Discrete saddle-point blocks of the fractured flow model.

The discrete problem reads::

    (A_lin + A_nl(u)) u - B^T p = g
                          B u   = f

where ``A_lin`` collects the Darcy mass terms and the interface coupling,
``A_nl(u)`` the Forchheimer terms ``beta |u|`` frozen at ``u``, and ``B`` the
jump-divergence (matrix divergence on triangles, ``div u_gamma - (u1.n -
u2.n)`` on fracture segments).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .mixed_space import DiscreteState, MixedSpace, basis_values, flux_values
from .problem_data import ProblemData, StructuralError
from .quadrature import MIDPOINT_BARY, MIDPOINT_WEIGHTS


@dataclass(frozen=True, eq=False)
class SaddleSystem:
    space: MixedSpace
    data: ProblemData
    A_lin: sp.csr_matrix
    B: sp.csr_matrix
    g_vec: np.ndarray
    f_vec: np.ndarray

    def flux_operator(self, u: np.ndarray) -> sp.csr_matrix:
        """A_lin + A_nl(u)."""
        if self.data.is_linear:
            return self.A_lin
        return (self.A_lin + assemble_forchheimer(self.space, self.data, u)).tocsr()

    def kkt(self, A=None) -> sp.csc_matrix:
        """Symmetric block matrix [[A, B^T], [B, 0]] acting on (u, -p)."""
        A = self.A_lin if A is None else A
        return sp.bmat([[A, self.B.T], [self.B, None]], format="csc")


def _per_triangle_alpha(space: MixedSpace, data: ProblemData) -> np.ndarray:
    mesh = space.mesh
    alpha = np.empty((mesh.n_triangles, 2, 2))
    for sub, tf in ((1, data.alpha1), (2, data.alpha2)):
        tris = mesh.triangles_of(sub)
        if len(tris):
            alpha[tris] = tf.expand(len(tris))
    return alpha


def _per_triangle_beta(space: MixedSpace, data: ProblemData) -> np.ndarray:
    mesh = space.mesh
    beta = np.zeros(mesh.n_triangles)
    for sub in (1, 2):
        tris = mesh.triangles_of(sub)
        if len(tris):
            beta[tris] = data.effective_beta(str(sub), len(tris))
    return beta


def _check(space: MixedSpace, data: ProblemData):
    mesh = space.mesh
    sizes = {
        "q1": len(mesh.triangles_of(1)),
        "q2": len(mesh.triangles_of(2)),
        "q_gamma": space.n_segments,
        "p_d1": len(space.boundary_dofs[1]),
        "p_d2": len(space.boundary_dofs[2]),
    }
    for name, n in sizes.items():
        v = np.asarray(getattr(data, name), dtype=float)
        if v.ndim and v.shape != (n,):
            raise StructuralError(f"{name}: expected {n} values for this space, got {v.shape}")


def _cell_mass(space: MixedSpace, coef: np.ndarray) -> sp.csr_matrix:
    """Sum over triangles of  int coef phi_k . phi_l  with the edge-midpoint
    rule; ``coef`` is (nt, 2, 2) or (nt, nq) (scalar per quadrature point)."""
    phi = basis_values(space, MIDPOINT_BARY)  # (nt, q, k, d)
    area = space.mesh.areas
    w = MIDPOINT_WEIGHTS[None, :] * area[:, None]
    if coef.ndim == 3:
        local = np.einsum("tq,tqkd,tde,tqle->tkl", w, phi, coef, phi)
    else:
        local = np.einsum("tq,tqkd,tqld->tkl", w * coef, phi, phi)
    rows = np.repeat(space.tri_dofs, 3, axis=1).ravel()
    cols = np.tile(space.tri_dofs, (1, 3)).ravel()
    n = space.n_flux
    return sp.csr_matrix((local.ravel(), (rows, cols)), shape=(n, n))


def _segment_pairs(space: MixedSpace):
    g = space.gamma_dofs
    return g[:-1], g[1:]


def assemble_linear(space: MixedSpace, data: ProblemData) -> SaddleSystem:
    _check(space, data)
    mesh = space.mesh
    nt, nf, n = mesh.n_triangles, space.n_segments, space.n_flux

    A = _cell_mass(space, _per_triangle_alpha(space, data))

    rows, cols, vals = [], [], []
    if nf:
        L = mesh.segment_lengths()
        # tangential Darcy mass on the fracture, exact for piecewise linears
        ag = data.alpha_gamma.expand(nf)
        lo, hi = _segment_pairs(space)
        m = ag * L / 6.0
        for r, c, v in ((lo, lo, 2 * m), (hi, hi, 2 * m), (lo, hi, m), (hi, lo, m)):
            rows.append(r), cols.append(c), vals.append(v)
        # interface coupling  kappa (xi u_i.n + xi_bar u_{i+1}.n) v_i.n
        k = data.kappa.expand(nf) / L
        d1, d2 = space.frac_dofs1, space.frac_dofs2
        xi, xb = data.xi, data.xi_bar
        for r, c, v in ((d1, d1, xi * k), (d2, d2, xi * k), (d1, d2, xb * k), (d2, d1, xb * k)):
            rows.append(r), cols.append(c), vals.append(v)
        A = A + sp.csr_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)
        )

    # jump-divergence
    br = [np.repeat(np.arange(nt), 3)]
    bc = [space.tri_dofs.ravel()]
    bv = [space.tri_signs.ravel()]
    if nf:
        seg_rows = nt + np.arange(nf)
        lo, hi = _segment_pairs(space)
        for dofs, sign in ((hi, 1.0), (lo, -1.0), (space.frac_dofs1, -1.0), (space.frac_dofs2, 1.0)):
            br.append(seg_rows), bc.append(dofs), bv.append(np.full(nf, sign))
    B = sp.csr_matrix(
        (np.concatenate(bv), (np.concatenate(br), np.concatenate(bc))), shape=(nt + nf, n)
    )

    g = np.zeros(n)
    for sub, pd in ((1, data.p_d1), (2, data.p_d2)):
        dofs = space.boundary_dofs[sub]
        if len(dofs):
            np.add.at(g, dofs, -np.broadcast_to(np.asarray(pd, dtype=float), dofs.shape))
    if nf:
        bottom, top = data.p_d_gamma
        g[space.gamma_dofs[0]] += bottom
        g[space.gamma_dofs[-1]] -= top

    f = np.zeros(nt + nf)
    area = mesh.areas
    for sub, q in ((1, data.q1), (2, data.q2)):
        tris = mesh.triangles_of(sub)
        f[tris] = np.broadcast_to(np.asarray(q, dtype=float), tris.shape) * area[tris]
    if nf:
        f[nt:] = np.broadcast_to(np.asarray(data.q_gamma, dtype=float), (nf,)) * mesh.segment_lengths()

    return SaddleSystem(space, data, A.tocsr(), B, g, f)


def assemble_forchheimer(space: MixedSpace, data: ProblemData, u) -> sp.csr_matrix:
    """State-dependent block  sum_q w_q beta(x_q) |u_h(x_q)| phi_k . phi_l.

    Edge-midpoint rule on triangles, midpoint rule on fracture segments.
    """
    u = u.u if isinstance(u, DiscreteState) else np.asarray(u, dtype=float)
    if u.shape != (space.n_flux,):
        raise StructuralError(f"flux vector has shape {u.shape}, expected ({space.n_flux},)")
    mesh = space.mesh
    n = space.n_flux
    beta = _per_triangle_beta(space, data)
    if np.any(beta):
        speed = np.linalg.norm(flux_values(space, u, MIDPOINT_BARY), axis=2)
        A = _cell_mass(space, beta[:, None] * speed)
    else:
        A = sp.csr_matrix((n, n))
    nf = space.n_segments
    if nf:
        bg = data.effective_beta("gamma", nf)
        if np.any(bg):
            lo, hi = _segment_pairs(space)
            mid = 0.5 * (u[lo] + u[hi])
            m = 0.25 * bg * mesh.segment_lengths() * np.abs(mid)
            rows = np.concatenate([lo, hi, lo, hi])
            cols = np.concatenate([lo, hi, hi, lo])
            A = A + sp.csr_matrix((np.tile(m, 4), (rows, cols)), shape=(n, n))
    return A.tocsr()


@dataclass(frozen=True)
class Residual:
    flux: np.ndarray
    mass: np.ndarray

    @property
    def flux_max(self) -> float:
        return float(np.abs(self.flux).max(initial=0.0))

    @property
    def flux_l2(self) -> float:
        return float(np.linalg.norm(self.flux))

    @property
    def mass_max(self) -> float:
        return float(np.abs(self.mass).max(initial=0.0))

    @property
    def mass_l2(self) -> float:
        return float(np.linalg.norm(self.mass))

    @property
    def combined(self) -> float:
        return float(np.hypot(self.flux_l2, self.mass_l2))


def residual(system: SaddleSystem, state: DiscreteState) -> Residual:
    state.check(system.space)
    A = system.flux_operator(state.u)
    flux = A @ state.u - system.B.T @ state.p - system.g_vec
    mass = system.B @ state.u - system.f_vec
    return Residual(flux, mass)


def operator_action(system: SaddleSystem, u: np.ndarray) -> np.ndarray:
    """Nonlinear flux operator (A_lin + A_nl(u)) u."""
    return system.flux_operator(u) @ u
