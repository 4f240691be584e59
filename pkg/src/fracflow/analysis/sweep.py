"""Vanishing-Forchheimer-coefficient studies: solve a ladder of decreasing
beta values with warm starts and compare against the beta = 0 target."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..assembly import assemble_linear, residual
from ..mesh import Rectangle, build_mesh
from ..mixed_space import MixedSpace, build_single_domain_space, build_space
from ..problem_data import ProblemData
from ..solver import SolverError, SolverOptions, solve_picard
from .norms import compute_norms, state_difference
from .oracle import uniform_flow_data, uniform_flow_oracle

SCENARIOS = ("fractured", "single")


@dataclass(frozen=True)
class SweepRow:
    beta: float
    target_dist: float
    beta13_u3: float
    beta12_u3: float
    beta_u3: float
    p32: float
    div_norm: float
    f_norm: float
    mass_residual: float
    iterations: int


@dataclass
class SweepResult:
    scenario: str
    rows: list[SweepRow] = field(default_factory=list)
    aborted: bool = False
    message: str = ""
    reports: list = field(default_factory=list)

    SCHEMA = tuple(SweepRow.__dataclass_fields__)

    def column(self, name) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows], dtype=float)

    def to_rows(self) -> list[dict]:
        return [{k: getattr(r, k) for k in self.SCHEMA} for r in self.rows]


def source_norm_l3(space: MixedSpace, data: ProblemData) -> float:
    """L^3 norm of all sources (matrix and fracture)."""
    mesh = space.mesh
    total = 0.0
    for sub, q in ((1, data.q1), (2, data.q2)):
        t = mesh.triangles_of(sub)
        v = np.broadcast_to(np.asarray(q, dtype=float), t.shape)
        total += float((mesh.areas[t] * np.abs(v) ** 3).sum())
    if space.n_segments:
        v = np.broadcast_to(np.asarray(data.q_gamma, dtype=float), (space.n_segments,))
        total += float((mesh.segment_lengths() * np.abs(v) ** 3).sum())
    return float(np.cbrt(total))


def beta_sweep(
    space: MixedSpace,
    data: ProblemData,
    betas,
    scenario: str = "fractured",
    options: SolverOptions | None = None,
    data_for_beta: Callable[[float], ProblemData] | None = None,
) -> SweepResult:
    """Solve for every beta (matrix coefficient only) from warm starts.

    ``data_for_beta(beta)`` overrides the default ``data.with_matrix_beta``
    when other data also depend on beta.  The target is the same problem at
    beta = 0: Darcy in the matrix, fracture law unchanged.
    """
    if scenario not in SCENARIOS:
        raise ValueError(f"scenario must be one of {SCENARIOS}")
    if (scenario == "fractured") != bool(space.n_segments):
        raise ValueError(f"space does not match the {scenario} scenario")
    betas = [float(b) for b in betas]
    if not betas or any(b <= 0 for b in betas) or np.any(np.diff(betas) >= 0):
        raise ValueError("betas must be positive and strictly decreasing")
    options = options or SolverOptions(tol_rel=1e-12, tol_abs=1e-14, max_iter=100)
    make = data_for_beta or data.with_matrix_beta

    result = SweepResult(scenario)
    try:
        target_data = make(0.0)
        target, _ = solve_picard(space, target_data, options)
    except SolverError as exc:
        result.aborted, result.message = True, f"target solve failed: {exc}"
        return result

    warm = None
    for beta in betas:
        d = make(beta)
        system = assemble_linear(space, d)
        opts = options if warm is None else _given(options)
        try:
            state, report = solve_picard(space, d, opts, initial=warm, system=system)
        except SolverError as exc:
            result.aborted, result.message = True, f"solve failed at beta={beta:g}: {exc}"
            break
        result.reports.append(report)
        warm = state
        nb = compute_norms(space, d, state)
        dist = compute_norms(space, d, state_difference(state, target)).flux_l2
        u3 = nb.matrix_flux_l3
        res = residual(system, state)
        result.rows.append(
            SweepRow(
                beta=beta,
                target_dist=dist,
                beta13_u3=beta ** (1 / 3) * u3,
                beta12_u3=beta**0.5 * u3,
                beta_u3=beta * u3,
                p32=nb.pressure_l32,
                div_norm=nb.div_l3,
                f_norm=source_norm_l3(space, d),
                mass_residual=res.mass_l2,
                iterations=report.iterations,
            )
        )
        if not report.converged:
            result.aborted, result.message = True, f"no convergence at beta={beta:g} ({report.status})"
            break
    return result


def _given(options: SolverOptions) -> SolverOptions:
    from dataclasses import replace

    return replace(options, initial_state="given")


def uniform_flow_sweep(
    betas,
    scenario: str = "fractured",
    nx: int = 8,
    ny: int = 4,
    alpha: float = 1.0,
    kappa: float = 0.5,
    beta_gamma: float = 1.0,
    xi: float = 0.75,
    p_left: float = 3.0,
    p_right: float = 0.0,
    domain: Rectangle = Rectangle(0.0, 2.0, 0.0, 1.0),
    options: SolverOptions | None = None,
) -> SweepResult:
    """Sweep on the uniform-flow configuration, where every beta has a
    closed-form solution.  Boundary pressures follow the exact profile of
    each beta, so all solves are exact uniform flows."""
    width = domain.width
    if scenario == "fractured":
        xf = domain.x0 + 0.5 * width
        mesh = build_mesh(domain, xf, nx, ny)
        space = build_space(mesh)
        widths, k = (xf - domain.x0, domain.x1 - xf), kappa
    else:
        mesh = build_mesh(domain, None, nx, ny)
        space = build_single_domain_space(mesh)
        widths, k = (width, 0.0), 0.0

    def make(beta):
        flow = uniform_flow_oracle(alpha, alpha, beta, beta, k, xi, widths, p_left - p_right, p_left, domain.x0)
        d = uniform_flow_data(mesh, flow, alpha=alpha, beta=beta, kappa=kappa, xi=xi, beta_gamma=beta_gamma)
        return d

    return beta_sweep(space, make(betas[0]), betas, scenario, options, data_for_beta=make)
