"""Manufactured-solution convergence study.

The smooth solution is built symbolically from the subdomain-1 pressure; the
subdomain-2 pressure and the fracture fields are then chosen so that the
interface conditions hold exactly.  Sources follow from the divergence
theorem, so the discrete load is the jump-divergence of the interpolated
exact flux.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import sympy as sy

from ..assembly import assemble_linear
from ..mesh import Rectangle, build_mesh, refine
from ..mixed_space import build_space, flux_values, gamma_flux_values, interpolate
from ..problem_data import ProblemData
from ..quadrature import DEG4_BARY, DEG4_WEIGHTS, gauss_interval, triangle_points
from ..solver import SolverOptions, solve_picard


class ConvergenceError(ValueError):
    pass


def _law_inverse(G, alpha, beta):
    """u with (alpha + beta |u|) u = G, for a scalar alpha."""
    norm = sy.sqrt(sum(g**2 for g in G))
    scale = 2 / (alpha + sy.sqrt(alpha**2 + 4 * beta * norm))
    return [scale * g for g in G]


class SmoothSolution:
    """Smooth exact solution for constant isotropic coefficients, fracture
    at ``x = xf``."""

    def __init__(self, alpha=1.0, beta=0.0, kappa=0.5, xi=0.75, alpha_gamma=1.0, beta_gamma=1.0, xf=1.0):
        x, y = sy.symbols("x y", real=True)
        X = x - xf
        a, b = sy.Float(alpha), sy.Float(beta)
        k, xi_, xb = sy.Float(kappa), sy.Float(xi), sy.Float(1.0 - xi)

        p1 = 2 + sy.Rational(1, 2) * sy.cos(sy.pi * y) * sy.exp(X) - X
        u1 = _law_inverse([-sy.diff(p1, x), -sy.diff(p1, y)], a, b)
        p1g = p1.subs(x, xf)
        u1n = u1[0].subs(x, xf)
        # p2 vanishes on the fracture; its normal trace is fixed by the jump
        T = p1g / k - u1n
        D = -(a + b * sy.Abs(T)) * T
        p2 = X * D + X**2 * sy.Rational(1, 2) * sy.sin(sy.pi * y)
        u2 = _law_inverse([-sy.diff(p2, x), -sy.diff(p2, y)], a, b)
        pg = p1g - k * (xi_ * u1n + xb * T)
        ug = _law_inverse([-sy.diff(pg, y)], sy.Float(alpha_gamma), sy.Float(beta_gamma))[0]

        f = lambda e: sy.lambdify((x, y), e, "numpy")  # noqa: E731
        self._p = {1: f(p1), 2: f(p2)}
        self._u = {1: (f(u1[0]), f(u1[1])), 2: (f(u2[0]), f(u2[1]))}
        self._pg = sy.lambdify(y, pg, "numpy")
        self._ug = sy.lambdify(y, ug, "numpy")
        self.xf = xf
        self.coefficients = dict(
            alpha=alpha, beta=beta, kappa=kappa, xi=xi, alpha_gamma=alpha_gamma, beta_gamma=beta_gamma
        )

    @staticmethod
    def _shape(v, x):
        return np.broadcast_to(np.asarray(v, dtype=float), np.shape(x)).copy()

    def flux(self, sub, x, y):
        fx, fy = self._u[sub]
        return self._shape(fx(x, y), x), self._shape(fy(x, y), x)

    def pressure(self, sub, x, y):
        return self._shape(self._p[sub](x, y), x)

    def gamma_flux(self, y):
        return self._shape(self._ug(y), y)

    def gamma_pressure(self, y):
        return self._shape(self._pg(y), y)


def manufactured_data(space, solution, template: ProblemData | None = None, order: int = 6):
    """Problem data whose exact solution is ``solution`` on ``space``.

    Returns ``(data, interpolated flux)``.
    """
    mesh = space.mesh
    template = template or ProblemData.uniform(**getattr(solution, "coefficients", {}))
    u_int = interpolate(space, solution.flux, solution.gamma_flux, order)
    B = assemble_linear(space, template).B
    load = B @ u_int
    nt = mesh.n_triangles
    q = load[:nt] / mesh.areas

    s, w = gauss_interval(order)
    a = mesh.vertices[mesh.edges[:, 0]]
    b = mesh.vertices[mesh.edges[:, 1]]
    pd = []
    for sub in (1, 2):
        e = mesh.boundary_edges(sub)
        pts = a[e, None, :] + s[None, :, None] * (b - a)[e, None, :]
        pd.append((solution.pressure(sub, pts[..., 0], pts[..., 1]) * w).sum(axis=1))
    y = mesh.fracture_y()
    data = template.replace(
        q1=q[mesh.triangles_of(1)],
        q2=q[mesh.triangles_of(2)],
        q_gamma=load[nt:] / mesh.segment_lengths(),
        p_d1=pd[0],
        p_d2=pd[1],
        p_d_gamma=(float(solution.gamma_pressure(y[:1])[0]), float(solution.gamma_pressure(y[-1:])[0])),
    )
    return data, u_int


@dataclass(frozen=True)
class ErrorRow:
    h: float
    n_dofs: int
    flux_l2: float
    pressure_l2: float
    pressure_pointwise_l2: float
    iterations: int


def discretization_errors(space, state, solution):
    """(flux L^2 error, pressure error against cell averages, pointwise
    pressure L^2 error); fracture contributions included."""
    mesh = space.mesh
    area = mesh.areas
    pts = triangle_points(mesh.vertices, mesh.triangles, DEG4_BARY)
    wq = DEG4_WEIGHTS[None, :] * area[:, None]
    uh = flux_values(space, state.u, DEG4_BARY)
    nt = mesh.n_triangles
    eu = ep = epp = 0.0
    for sub in (1, 2):
        t = mesh.triangles_of(sub)
        vx, vy = solution.flux(sub, pts[t, :, 0], pts[t, :, 1])
        eu += float((wq[t] * ((vx - uh[t, :, 0]) ** 2 + (vy - uh[t, :, 1]) ** 2)).sum())
        pe = solution.pressure(sub, pts[t, :, 0], pts[t, :, 1])
        pbar = (pe * wq[t]).sum(axis=1) / area[t]
        ep += float((area[t] * (pbar - state.p[t]) ** 2).sum())
        epp += float((wq[t] * (pe - state.p[t, None]) ** 2).sum())
    L = mesh.segment_lengths()
    s, w = gauss_interval(5)
    y0 = mesh.vertices[mesh.fracture_vertices[:-1], 1]
    ys = y0[:, None] + s[None, :] * L[:, None]
    wg = w[None, :] * L[:, None]
    ugh = gamma_flux_values(space, state.u, s)
    eu += float((wg * (solution.gamma_flux(ys) - ugh) ** 2).sum())
    pge = solution.gamma_pressure(ys)
    pbar = (pge * wg).sum(axis=1) / L
    ph = state.p[nt:]
    ep += float((L * (pbar - ph) ** 2).sum())
    epp += float((wg * (pge - ph[:, None]) ** 2).sum())
    return np.sqrt(eu), np.sqrt(ep), np.sqrt(epp)


def fitted_slope(h, err) -> float:
    """Least-squares slope of log(err) against log(h)."""
    h, err = np.asarray(h, dtype=float), np.asarray(err, dtype=float)
    if len(h) < 3:
        raise ConvergenceError(f"need at least 3 meshes for a slope, got {len(h)}")
    if np.any(err <= 0):
        return float("nan")
    return float(np.polyfit(np.log(h), np.log(err), 1)[0])


@dataclass
class RateTable:
    rows: list[ErrorRow]
    flux_slope: float
    pressure_slope: float
    pressure_pointwise_slope: float
    monotone: bool
    warnings: list = field(default_factory=list)

    SCHEMA = ("h", "n_dofs", "flux_l2_error", "pressure_l2_error", "pressure_pointwise_l2_error", "iterations")

    def to_rows(self) -> list[dict]:
        return [
            dict(
                h=r.h,
                n_dofs=r.n_dofs,
                flux_l2_error=r.flux_l2,
                pressure_l2_error=r.pressure_l2,
                pressure_pointwise_l2_error=r.pressure_pointwise_l2,
                iterations=r.iterations,
            )
            for r in self.rows
        ]


def mms_convergence(
    refinements: int = 4,
    data_template: ProblemData | None = None,
    solution=None,
    domain: Rectangle = Rectangle(0.0, 2.0, 0.0, 1.0),
    fracture_x: float = 1.0,
    base: tuple[int, int] = (4, 2),
    options: SolverOptions | None = None,
) -> RateTable:
    """Errors on the base mesh and ``refinements`` uniform refinements."""
    if refinements + 1 < 3:
        raise ConvergenceError(f"need at least 3 meshes for a slope, got {refinements + 1}")
    solution = solution or SmoothSolution(xf=fracture_x)
    options = options or SolverOptions(tol_rel=1e-12, tol_abs=1e-13, max_iter=100)
    mesh = build_mesh(domain, fracture_x, *base)
    rows = []
    for level in range(refinements + 1):
        if level:
            mesh = refine(mesh)
        space = build_space(mesh)
        data, _ = manufactured_data(space, solution, data_template)
        state, report = solve_picard(space, data, options)
        eu, ep, epp = discretization_errors(space, state, solution)
        rows.append(ErrorRow(mesh.h, space.n_dofs, eu, ep, epp, report.iterations))
    h = [r.h for r in rows]
    eu = [r.flux_l2 for r in rows]
    ep = [r.pressure_l2 for r in rows]
    table = RateTable(
        rows,
        fitted_slope(h, eu),
        fitted_slope(h, ep),
        fitted_slope(h, [r.pressure_pointwise_l2 for r in rows]),
        monotone=bool(np.all(np.diff(eu) < 0) and np.all(np.diff(ep) < 0)),
    )
    if not table.monotone:
        table.warnings.append("non-monotone error decay")
    return table
