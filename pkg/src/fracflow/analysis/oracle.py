"""Closed-form uniform flow across the fracture.

With flow normal to the fracture, no tangential fracture flow and no
sources, both normal traces equal the same flux U and the interface terms
reduce to kappa U on each side.  Subdomain widths act as series resistances:

    (a1 w1 + a2 w2 + 2 kappa) U + (b1 w1 + b2 w2) |U| U = dp
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..mesh import Mesh
from ..problem_data import ProblemData


class OracleError(ValueError):
    pass


@dataclass(frozen=True)
class UniformFlow:
    U: float
    p_gamma: float
    p_left: float
    p_right: float
    x_left: float
    x_fracture: float
    x_right: float
    slope1: float  # pressure drop per unit length in subdomain 1
    slope2: float
    kappa: float

    def pressure(self, x) -> np.ndarray:
        """Piecewise-linear matrix pressure; the fracture sits at a jump."""
        x = np.asarray(x, dtype=float)
        left = self.p_left - self.slope1 * (x - self.x_left)
        p2_at_gamma = self.p_gamma - self.kappa * self.U
        right = p2_at_gamma - self.slope2 * (x - self.x_fracture)
        return np.where(x < self.x_fracture, left, right)

    def p1_at_gamma(self) -> float:
        return self.p_gamma + self.kappa * self.U

    def p2_at_gamma(self) -> float:
        return self.p_gamma - self.kappa * self.U


def uniform_flow_oracle(
    alpha1: float,
    alpha2: float,
    beta1: float,
    beta2: float,
    kappa: float,
    xi: float = 0.75,
    widths=(1.0, 1.0),
    dp: float = 1.0,
    p_left: float | None = None,
    x_left: float = 0.0,
) -> UniformFlow:
    """Normal flux ``U`` (sign of ``dp``), fracture pressure and profile.

    ``xi`` does not enter: the two traces coincide so xi + xi_bar = 1.
    """
    w1, w2 = widths
    a = alpha1 * w1 + alpha2 * w2 + 2.0 * kappa
    b = beta1 * w1 + beta2 * w2
    if not (a > 0 and b >= 0 and np.isfinite(dp)):
        raise OracleError(f"no admissible root for a={a}, b={b}, dp={dp}")
    # root of a U + b U^2 = |dp| in the cancellation-free form
    U = float(np.sign(dp) * 2.0 * abs(dp) / (a + np.sqrt(a * a + 4.0 * b * abs(dp))))
    if not np.isfinite(U) or (dp != 0 and np.sign(U) != np.sign(dp)):
        raise OracleError(f"no root with the sign of dp={dp}")
    pl = dp if p_left is None else float(p_left)
    s1 = (alpha1 + beta1 * abs(U)) * U
    s2 = (alpha2 + beta2 * abs(U)) * U
    pg = pl - s1 * w1 - kappa * U
    return UniformFlow(
        U=U,
        p_gamma=float(pg),
        p_left=pl,
        p_right=pl - dp,
        x_left=x_left,
        x_fracture=x_left + w1,
        x_right=x_left + w1 + w2,
        slope1=float(s1),
        slope2=float(s2),
        kappa=kappa,
    )


def uniform_flow_data(mesh: Mesh, flow: UniformFlow, **coefficients) -> ProblemData:
    """Problem data reproducing ``flow`` on ``mesh``: exact edge-averaged
    boundary pressures (the profile is linear along every boundary edge) and
    the fracture pressure at both tips."""
    mid = mesh.edge_midpoints
    pd = [flow.pressure(mid[mesh.boundary_edges(sub), 0]) for sub in (1, 2)]
    data = ProblemData.uniform(**coefficients)
    return data.replace(p_d1=pd[0], p_d2=pd[1], p_d_gamma=(flow.p_gamma, flow.p_gamma))


@dataclass(frozen=True)
class UniformFlowSolution:
    """Exact fields of a uniform flow, in the interface used by the
    manufactured-solution study."""

    flow: UniformFlow

    def flux(self, sub, x, y):
        x = np.asarray(x, dtype=float)
        return np.full_like(x, self.flow.U), np.zeros_like(x)

    def pressure(self, sub, x, y):
        return self.flow.pressure(np.asarray(x, dtype=float))

    def gamma_flux(self, y):
        return np.zeros_like(np.asarray(y, dtype=float))

    def gamma_pressure(self, y):
        return np.full_like(np.asarray(y, dtype=float), self.flow.p_gamma)
