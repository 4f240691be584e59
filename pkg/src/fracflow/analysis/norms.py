"""Lebesgue and divergence norms of discrete states, per field."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from ..mixed_space import DiscreteState, MixedSpace, divergence, flux_values, gamma_flux_values, trace_values
from ..quadrature import DEG4_BARY, DEG4_WEIGHTS, gauss_interval


@dataclass(frozen=True)
class NormBundle:
    u1_l2: float
    u2_l2: float
    u1_l3: float
    u2_l3: float
    ugamma_l2: float
    ugamma_l3: float
    trace1_l2: float
    trace2_l2: float
    div1_l2: float
    div2_l2: float
    divgamma_l2: float
    div1_l3: float
    div2_l3: float
    divgamma_l3: float
    p1_l2: float
    p2_l2: float
    pgamma_l2: float
    p1_l32: float
    p2_l32: float
    pgamma_l32: float

    @property
    def flux_l2(self) -> float:
        return float(np.sqrt(self.u1_l2**2 + self.u2_l2**2 + self.ugamma_l2**2))

    @property
    def flux_l3(self) -> float:
        return float(np.cbrt(self.u1_l3**3 + self.u2_l3**3 + self.ugamma_l3**3))

    @property
    def matrix_flux_l2(self) -> float:
        return float(np.hypot(self.u1_l2, self.u2_l2))

    @property
    def matrix_flux_l3(self) -> float:
        """Sum of the subdomain L^3 norms."""
        return self.u1_l3 + self.u2_l3

    @property
    def div_l2(self) -> float:
        return float(np.sqrt(self.div1_l2**2 + self.div2_l2**2 + self.divgamma_l2**2))

    @property
    def div_l3(self) -> float:
        return float(np.cbrt(self.div1_l3**3 + self.div2_l3**3 + self.divgamma_l3**3))

    @property
    def pressure_l2(self) -> float:
        return float(np.sqrt(self.p1_l2**2 + self.p2_l2**2 + self.pgamma_l2**2))

    @property
    def pressure_l32(self) -> float:
        s = self.p1_l32**1.5 + self.p2_l32**1.5 + self.pgamma_l32**1.5
        return float(s ** (2.0 / 3.0))

    @property
    def w_norm(self) -> float:
        """Flux L^2 + divergence L^2 + normal traces on the fracture."""
        return self.flux_l2 + self.div_l2 + self.trace1_l2 + self.trace2_l2

    def as_dict(self) -> dict:
        return asdict(self)


def _lp(values, weights, p):
    return float((weights * np.abs(values) ** p).sum() ** (1.0 / p))


def compute_norms(space: MixedSpace, data=None, state: DiscreteState | None = None) -> NormBundle:
    """All field norms of ``state``.  Fluxes use a degree-4 triangle rule
    (exact for L^2), fracture fluxes Gauss rules, pressures closed forms."""
    if state is None:
        state, data = data, None
    mesh = space.mesh
    u, p = state.u, state.p
    nt = mesh.n_triangles
    area = mesh.areas

    vals = flux_values(space, u, DEG4_BARY)
    speed = np.linalg.norm(vals, axis=2)
    w = DEG4_WEIGHTS[None, :] * area[:, None]
    div = divergence(space, u)
    out = {}
    for sub in (1, 2):
        t = mesh.triangles_of(sub)
        out[f"u{sub}_l2"] = _lp(speed[t], w[t], 2)
        out[f"u{sub}_l3"] = _lp(speed[t], w[t], 3)
        out[f"div{sub}_l2"] = _lp(div[t], area[t], 2)
        out[f"div{sub}_l3"] = _lp(div[t], area[t], 3)
        out[f"p{sub}_l2"] = _lp(p[t], area[t], 2)
        out[f"p{sub}_l32"] = _lp(p[t], area[t], 1.5)

    nf = space.n_segments
    if nf:
        L = mesh.segment_lengths()
        s, gw = gauss_interval(4)
        ug = gamma_flux_values(space, u, s)
        wq = L[:, None] * gw[None, :]
        g = space.gamma_dofs
        t1, t2 = trace_values(space, u)
        divg = (u[g[1:]] - u[g[:-1]] - (u[space.frac_dofs1] - u[space.frac_dofs2])) / L
        pg = p[nt:]
        out.update(
            ugamma_l2=_lp(ug, wq, 2),
            ugamma_l3=_lp(ug, wq, 3),
            trace1_l2=_lp(t1, L, 2),
            trace2_l2=_lp(t2, L, 2),
            divgamma_l2=_lp(divg, L, 2),
            divgamma_l3=_lp(divg, L, 3),
            pgamma_l2=_lp(pg, L, 2),
            pgamma_l32=_lp(pg, L, 1.5),
        )
    else:
        for k in ("ugamma_l2", "ugamma_l3", "trace1_l2", "trace2_l2", "divgamma_l2",
                  "divgamma_l3", "pgamma_l2", "pgamma_l32"):
            out[k] = 0.0
    return NormBundle(**out)


def state_difference(a: DiscreteState, b: DiscreteState) -> DiscreteState:
    return DiscreteState(a.u - b.u, a.p - b.p)
