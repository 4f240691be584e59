"""Linear saddle-point solves and the damped Picard iteration for the
Darcy-Forchheimer problem."""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse.linalg as spla

from .assembly import SaddleSystem, assemble_linear, residual
from .mixed_space import DiscreteState, MixedSpace
from .problem_data import ProblemData

INITIAL_STATES = ("zero", "given", "darcy")
BACKENDS = ("direct", "uzawa")


class SingularSystemError(RuntimeError):
    """Factorization hit a zero pivot; ``pivot`` is the offending unknown."""

    def __init__(self, message, pivot=None):
        super().__init__(message)
        self.pivot = pivot


class SolverError(RuntimeError):
    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


@dataclass(frozen=True)
class SolverOptions:
    tol_rel: float = 1e-10
    tol_abs: float = 1e-12
    max_iter: int = 50
    damping: float = 1.0
    initial_state: str = "darcy"
    backend: str = "direct"
    min_damping: float = 1.0 / 16.0
    uzawa_tol: float = 1e-13
    uzawa_max_iter: int = 2000

    def __post_init__(self):
        if not (self.tol_rel > 0 and self.tol_abs > 0):
            raise ValueError("solver tolerances must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if not 0 < self.damping <= 1:
            raise ValueError("damping must lie in (0, 1]")
        if self.initial_state not in INITIAL_STATES:
            raise ValueError(f"initial_state must be one of {INITIAL_STATES}")
        if self.backend not in BACKENDS:
            raise ValueError(f"backend must be one of {BACKENDS}")


@dataclass
class SolveReport:
    iterations: int = 0
    flux_history: list = field(default_factory=list)
    mass_history: list = field(default_factory=list)
    converged: bool = False
    max_iter_reached: bool = False
    diverged: bool = False
    stagnated: bool = False
    warnings: list = field(default_factory=list)
    u_l2: float = 0.0
    u_l3: float = 0.0
    p_l32: float = 0.0
    wall_time: float = 0.0
    backend: str = "direct"

    @property
    def residual_history(self) -> np.ndarray:
        return np.hypot(self.flux_history, self.mass_history)

    @property
    def final_flux_residual(self) -> float:
        return self.flux_history[-1] if self.flux_history else 0.0

    @property
    def final_mass_residual(self) -> float:
        return self.mass_history[-1] if self.mass_history else 0.0

    @property
    def status(self) -> str:
        if self.diverged:
            return "diverged"
        if self.stagnated:
            return "stagnated"
        if self.max_iter_reached:
            return "max_iter"
        return "converged" if self.converged else "unconverged"

    SCHEMA = (
        "status",
        "backend",
        "iterations",
        "flux_residual",
        "mass_residual",
        "u_l2",
        "u_l3",
        "p_l32",
        "wall_time",
    )

    def to_row(self) -> dict:
        return {
            "status": self.status,
            "backend": self.backend,
            "iterations": self.iterations,
            "flux_residual": self.final_flux_residual,
            "mass_residual": self.final_mass_residual,
            "u_l2": self.u_l2,
            "u_l3": self.u_l3,
            "p_l32": self.p_l32,
            "wall_time": self.wall_time,
        }


def _locate_zero_pivot(K) -> int | None:
    """Index of the first vanishing pivot of a partially pivoted dense LU."""
    if K.shape[0] > 4000:
        return None
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        _, _, U = sla.lu(K.toarray())
    d = np.abs(np.diag(U))
    scale = max(d.max(initial=0.0), 1.0)
    bad = np.flatnonzero(d <= 1e-13 * scale)
    return int(bad[0]) if len(bad) else None


def _describe(space: MixedSpace, k: int) -> str:
    if k < space.n_flux:
        return f"flux unknown {k}"
    return f"pressure unknown {k - space.n_flux}"


def _factorize(K, space: MixedSpace):
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("error", sla.LinAlgWarning)
            lu = spla.splu(K.tocsc())
    except RuntimeError as exc:
        k = _locate_zero_pivot(K)
        where = f" (zero pivot at {_describe(space, k)})" if k is not None else ""
        raise SingularSystemError(f"singular saddle-point matrix{where}: {exc}", k) from exc
    if not np.all(np.isfinite(lu.U.diagonal())) or np.any(lu.U.diagonal() == 0):
        k = _locate_zero_pivot(K)
        raise SingularSystemError("singular saddle-point matrix", k)
    return lu


def _direct(system: SaddleSystem, A) -> DiscreteState:
    space = system.space
    lu = _factorize(system.kkt(A), space)
    z = lu.solve(np.concatenate([system.g_vec, system.f_vec]))
    if not np.all(np.isfinite(z)):
        raise SingularSystemError("non-finite solution of the saddle-point system")
    # second block is -p in the symmetric form
    return DiscreteState(z[: space.n_flux].copy(), -z[space.n_flux :])


def solve_linear_saddle(system: SaddleSystem, A=None) -> DiscreteState:
    """Direct sparse solve of  A u - B^T p = g,  B u = f  (A defaults to A_lin)."""
    return _direct(system, system.A_lin if A is None else A)


def _pressure_mass(space: MixedSpace) -> np.ndarray:
    m = space.mesh.areas
    if space.n_segments:
        m = np.concatenate([m, space.mesh.segment_lengths()])
    return m


def _boundary_mean_pressure(system: SaddleSystem) -> float:
    """Boundary-length weighted mean of the prescribed pressures."""
    space, data = system.space, system.data
    L = space.mesh.edge_lengths
    num = den = 0.0
    for sub, pd in ((1, data.p_d1), (2, data.p_d2)):
        edges = space.mesh.boundary_edges(sub)
        if len(edges):
            v = np.broadcast_to(np.asarray(pd, dtype=float), edges.shape)
            num += float(v @ L[edges])
            den += float(L[edges].sum())
    return num / den if den > 0 else 0.0


def solve_uzawa(system: SaddleSystem, options: SolverOptions | None = None, A=None):
    """Pressure Schur-complement iteration.

    Conjugate gradients on  B A^{-1} B^T p = f - B A^{-1} g,  preconditioned
    by the inverse lumped pressure mass, with A factorized once.  Returns
    ``(state, report)``.
    """
    options = options or SolverOptions(backend="uzawa")
    t0 = time.perf_counter()
    space = system.space
    A = system.A_lin if A is None else A
    lu = _factorize(A, space)
    B = system.B
    n_p = B.shape[0]
    Ag = lu.solve(system.g_vec)
    rhs = system.f_vec - B @ Ag

    S = spla.LinearOperator((n_p, n_p), matvec=lambda q: B @ lu.solve(B.T @ q), dtype=float)
    minv = 1.0 / _pressure_mass(space)
    M = spla.LinearOperator((n_p, n_p), matvec=lambda r: minv * r, dtype=float)
    p0 = np.full(n_p, _boundary_mean_pressure(system))

    report = SolveReport(backend="uzawa")
    count = [0]

    def cb(_):
        count[0] += 1

    r0 = rhs - S @ p0
    scale = max(np.linalg.norm(rhs), np.linalg.norm(system.g_vec), 1.0)
    atol = options.uzawa_tol * scale
    if np.linalg.norm(r0) <= atol:
        p, info = p0, 0
    else:
        p, info = spla.cg(
            S, rhs, x0=p0, rtol=0.0, atol=atol, maxiter=options.uzawa_max_iter, M=M, callback=cb
        )
    u = lu.solve(system.g_vec + B.T @ p)
    state = DiscreteState(u, p)
    res = residual(system, state) if A is system.A_lin else None
    report.iterations = count[0]
    if res is not None:
        report.flux_history.append(res.flux_l2)
        report.mass_history.append(res.mass_l2)
    report.stagnated = info != 0
    report.converged = info == 0
    if report.stagnated:
        report.warnings.append(f"Uzawa iteration stagnated after {count[0]} steps")
    report.wall_time = time.perf_counter() - t0
    _fill_norms(report, space, system.data, state)
    return state, report


def _fill_norms(report: SolveReport, space, data, state):
    from .analysis.norms import compute_norms

    nb = compute_norms(space, data, state)
    report.u_l2 = nb.flux_l2
    report.u_l3 = nb.flux_l3
    report.p_l32 = nb.pressure_l32


def _inner_solve(system, A, options) -> DiscreteState:
    if options.backend == "uzawa":
        state, rep = solve_uzawa(system, options, A)
        if rep.stagnated:
            raise SolverError("inner Uzawa solve stagnated", rep)
        return state
    return _direct(system, A)


def solve_picard(
    space: MixedSpace,
    data: ProblemData,
    options: SolverOptions | None = None,
    initial: DiscreteState | None = None,
    system: SaddleSystem | None = None,
):
    """Damped frozen-coefficient iteration for the Forchheimer problem.

    Each step solves the linear saddle system with flux block
    ``A_lin + A_nl(u^k)`` and relaxes ``u^{k+1} = u^k + theta (u* - u^k)``
    (same for ``p``).  ``theta`` is halved while the residual grows, down to
    ``options.min_damping``.  With all beta terms absent this is one linear
    solve.  Returns ``(state, report)``.
    """
    options = options or SolverOptions()
    t0 = time.perf_counter()
    system = system or assemble_linear(space, data)
    report = SolveReport(backend=options.backend)

    if data.is_linear:
        state = _inner_solve(system, system.A_lin, options)
        res = residual(system, state)
        report.iterations = 1
        report.flux_history.append(res.flux_l2)
        report.mass_history.append(res.mass_l2)
        report.converged = True
        report.wall_time = time.perf_counter() - t0
        _fill_norms(report, space, data, state)
        return state, report

    if options.initial_state == "given":
        if initial is None:
            raise ValueError("initial_state='given' requires an initial state")
        state = initial.copy()
        state.check(space)
    elif options.initial_state == "zero":
        state = DiscreteState.zeros(space)
    else:
        state = _inner_solve(system, system.A_lin, options)

    res = residual(system, state)
    report.flux_history.append(res.flux_l2)
    report.mass_history.append(res.mass_l2)
    r0 = res.combined
    target = options.tol_abs + options.tol_rel * r0
    current = r0

    while current > target:
        if report.iterations >= options.max_iter:
            report.max_iter_reached = True
            report.warnings.append(f"max_iter={options.max_iter} reached, residual {current:.3e}")
            break
        A = system.flux_operator(state.u)
        star = _inner_solve(system, A, options)
        theta = options.damping
        while True:
            trial = DiscreteState(
                state.u + theta * (star.u - state.u), state.p + theta * (star.p - state.p)
            )
            res = residual(system, trial)
            if res.combined <= current or res.combined <= target or theta <= options.min_damping:
                break
            theta *= 0.5
        state = trial
        report.iterations += 1
        report.flux_history.append(res.flux_l2)
        report.mass_history.append(res.mass_l2)
        if res.combined > current and report.iterations > 1:
            report.warnings.append(
                f"residual increased at iteration {report.iterations} "
                f"({current:.3e} -> {res.combined:.3e})"
            )
        current = res.combined
        hist = report.residual_history
        if len(hist) > 5 and hist[-1] > 10.0 * hist[-6]:
            report.diverged = True
            break
        if not np.isfinite(current):
            report.diverged = True
            break

    report.converged = current <= target and not report.diverged
    report.wall_time = time.perf_counter() - t0
    _fill_norms(report, space, data, state)
    if report.diverged:
        raise SolverError("Picard iteration diverged", report)
    return state, report


__all__ = [
    "SingularSystemError",
    "SolveReport",
    "SolverError",
    "SolverOptions",
    "solve_linear_saddle",
    "solve_picard",
    "solve_uzawa",
]
