"""Acceptance criteria, each at its stated tolerance and time budget.

Every test prints one ``PASS``/``FAIL`` line (repeated in the pytest
terminal summary).  Run alone with ``pytest tests/test_acceptance.py -s``.
"""

import filecmp
import itertools
import time

import numpy as np
import pytest

from fracflow import ProblemData, SolverOptions, build_mesh, build_space, solve_picard
from fracflow.analysis.inequalities import check_vector_inequalities
from fracflow.analysis.infsup import infsup_study
from fracflow.analysis.mms import SmoothSolution, mms_convergence
from fracflow.analysis.monotonicity import discrete_monotonicity
from fracflow.analysis.oracle import uniform_flow_data, uniform_flow_oracle
from fracflow.analysis.sweep import uniform_flow_sweep
from fracflow.cli import run
from fracflow.mixed_space import DiscreteState
from fracflow.problem_data import Law

from conftest import DOMAIN, record_acceptance


def verdict(number, title, ok, detail):
    record_acceptance(f"{'PASS' if ok else 'FAIL'} criterion {number} ({title}): {detail}")
    assert ok, detail


def test_1_inequality_suite():
    t0 = time.perf_counter()
    rows = check_vector_inequalities(samples=100_000, dims=[1, 2, 3], seed=0)
    elapsed = time.perf_counter() - t0
    total = sum(r.violations for r in rows)
    ok = total == 0 and elapsed < 2.0 and len(rows) == 4
    verdict(1, "vector inequalities", ok, f"{total} violations over 4 x {rows[0].samples} pairs, {elapsed:.2f} s")


def test_2_hydrostatic_exactness():
    c = 3.7
    mesh = build_mesh(DOMAIN, 1.0, 16, 8)
    space = build_space(mesh)
    laws = [Law.DARCY, Law.FORCHHEIMER]
    t0 = time.perf_counter()
    worst_u = worst_p = 0.0
    combos = 0
    for l1, l2, lg in itertools.product(laws, repeat=3):
        d = ProblemData.uniform(beta=1.0, beta_gamma=1.0, kappa=0.5, p_d=c, law1=l1, law2=l2, law_gamma=lg)
        state, _ = solve_picard(space, d)
        worst_u = max(worst_u, np.abs(state.u).max())
        worst_p = max(worst_p, np.abs(state.p - c).max())
        combos += 1
    elapsed = time.perf_counter() - t0
    ok = worst_u <= 1e-12 * c and worst_p <= 1e-12 * c and elapsed < 1.0
    verdict(2, "hydrostatic", ok, f"{combos} law combinations, max|u|={worst_u:.1e}, max|p-c|={worst_p:.1e}, {elapsed:.2f} s")


def test_3_uniform_flow_oracle():
    mesh = build_mesh(DOMAIN, 1.0, 16, 8)
    space = build_space(mesh)
    L = mesh.segment_lengths()
    t0 = time.perf_counter()
    errs, iters = {}, 0
    for beta, tol in ((0.0, 1e-10), (1.0, 1e-8)):
        flow = uniform_flow_oracle(1.0, 1.0, beta, beta, 0.5, 0.75, (1.0, 1.0), 3.0, 3.0)
        d = uniform_flow_data(mesh, flow, alpha=1.0, beta=beta, kappa=0.5, beta_gamma=1.0)
        state, rep = solve_picard(space, d, SolverOptions(tol_rel=1e-12, tol_abs=1e-13, max_iter=30))
        traces = np.concatenate([state.u[space.frac_dofs1], state.u[space.frac_dofs2]]) / np.tile(L, 2)
        errs[beta] = (np.abs(traces - flow.U).max(), tol, rep.converged)
        if beta:
            iters = rep.iterations
    elapsed = time.perf_counter() - t0
    ok = all(e <= tol and conv for e, tol, conv in errs.values()) and iters <= 30 and elapsed < 2.0
    verdict(
        3,
        "uniform-flow oracle",
        ok,
        f"Darcy err {errs[0.0][0]:.1e}, Forchheimer err {errs[1.0][0]:.1e} in {iters} Picard iterations, {elapsed:.2f} s",
    )


def test_4_uniqueness_and_monotonicity():
    space = build_space(build_mesh(DOMAIN, 1.0, 8, 4))
    d = ProblemData.uniform(beta=1.0, beta_gamma=1.0, kappa=0.5, q_gamma=1.0, p_d1=1.0, p_d2=0.0).replace(
        p_d_gamma=(0.5, 0.5)
    )
    opts = SolverOptions(tol_rel=1e-13, tol_abs=1e-13, max_iter=300, initial_state="given")
    rng = np.random.default_rng(7)
    t0 = time.perf_counter()
    states = []
    for _ in range(5):
        init = DiscreteState(rng.uniform(-5, 5, space.n_flux), rng.uniform(-5, 5, space.n_pressure))
        s, rep = solve_picard(space, d, opts, initial=init)
        assert rep.converged
        states.append(np.concatenate([s.u, s.p]))
    worst = max(
        np.linalg.norm(a - b) / max(np.linalg.norm(a), np.linalg.norm(b)) for a, b in itertools.combinations(states, 2)
    )
    mono = discrete_monotonicity(space, d, pairs=1000, seed=11)
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-9 and mono.failures == 0 and elapsed < 10.0
    verdict(
        4,
        "uniqueness and monotonicity",
        ok,
        f"max pairwise rel. diff {worst:.1e} over 5 starts; {mono.failures}/{mono.pairs} non-positive pairings "
        f"(min ratio {mono.min_ratio:.2e}), {elapsed:.2f} s",
    )


def test_5_beta_sweeps():
    betas = [10.0**-k for k in range(7)]
    t0 = time.perf_counter()
    details, ok = [], True
    for scenario in ("fractured", "single"):
        res = uniform_flow_sweep(betas, scenario, nx=16, ny=8)
        dist = res.column("target_dist")
        b12 = res.column("beta12_u3")
        mass = res.column("mass_residual")
        good = (
            not res.aborted
            and len(res.rows) == len(betas)
            and np.all(np.diff(dist) < 0)
            and dist[-1] <= 1e-5 * dist[0]
            and np.all(np.diff(b12) < 0)
            and np.all(mass <= 1e-10)
        )
        ok &= bool(good)
        details.append(f"{scenario}: dist ratio {dist[-1] / dist[0]:.1e}, max mass res {mass.max():.1e}")
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 30.0
    verdict(5, "beta -> 0 sweeps", ok, "; ".join(details) + f", {elapsed:.2f} s")


def test_6_infsup():
    t0 = time.perf_counter()
    res = infsup_study(((2, 1), (4, 2), (8, 4)))
    elapsed = time.perf_counter() - t0
    th = np.array([r.theta for r in res])
    ratio = th.max() / th.min() if th.min() > 0 else np.inf
    ok = np.all(th > 0) and ratio <= 1.2 and elapsed < 10.0
    verdict(6, "discrete inf-sup", ok, f"theta_h = {np.round(th, 4).tolist()}, max/min {ratio:.4f}, {elapsed:.2f} s")


def test_7_mms_convergence():
    t0 = time.perf_counter()
    details, ok = [], True
    cases = {
        "Darcy": dict(beta=0.0, beta_gamma=0.0),
        "Forchheimer beta=1": dict(beta=1.0, beta_gamma=1.0),
    }
    for name, c in cases.items():
        sol = SmoothSolution(alpha=1.0, kappa=0.5, xi=0.75, alpha_gamma=1.0, **c)
        template = ProblemData.uniform(alpha=1.0, kappa=0.5, xi=0.75, alpha_gamma=1.0, **c)
        table = mms_convergence(4, template, sol, options=SolverOptions(tol_rel=1e-12, tol_abs=1e-13, max_iter=300))
        slopes = (table.flux_slope, table.pressure_slope, table.pressure_pointwise_slope)
        good = min(slopes) >= 0.9 and len(table.rows) == 5
        ok &= bool(good)
        details.append(
            f"{name}: flux slope {slopes[0]:.3f}, pressure slope {slopes[1]:.3f} "
            f"(cell averages) / {slopes[2]:.3f} (pointwise)"
        )
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 60.0
    verdict(7, "manufactured-solution rates", ok, "; ".join(details) + f", {elapsed:.2f} s")


CONFIGS = {
    "solve": '[data]\nbeta = 1.0\nkappa = 0.5\nq_gamma = 1.0\np_d1 = 1.0\n[scenario]\ntype = "solve"\n',
    "uniform-flow": '[data]\nbeta = 1.0\nkappa = 0.5\n[scenario]\ntype = "uniform-flow"\n',
    "beta-sweep": '[data]\nkappa = 0.5\n[scenario]\ntype = "beta-sweep"\n',
    "mms": '[data]\nkappa = 0.5\n[scenario]\ntype = "mms"\nrefinements = 2\nbeta = 1.0\n',
    "infsup": '[scenario]\ntype = "infsup"\n',
    "inequalities": '[scenario]\ntype = "inequalities"\nsamples = 10000\n',
}


def test_8_determinism(tmp_path):
    mesh = '[mesh]\nextents = [0.0, 2.0, 0.0, 1.0]\nfracture_x = 1.0\nnx = 8\nny = 4\n'
    solver = "[solver]\nstrict = true\nmax_iter = 200\ntol_rel = 1e-12\n"
    mismatched, compared = [], 0
    for name, body in CONFIGS.items():
        outs = []
        for k in range(2):
            cfg = tmp_path / f"{name}_{k}.toml"
            cfg.write_text(mesh + solver + body + f'[output]\ndirectory = "{name}_{k}"\n')
            assert run(cfg) == 0, name
            outs.append(tmp_path / f"{name}_{k}")
        for f in sorted(p.name for p in outs[0].glob("*.csv")):
            compared += 1
            if not filecmp.cmp(outs[0] / f, outs[1] / f, shallow=False):
                mismatched.append(f"{name}/{f}")
    ok = not mismatched and compared >= len(CONFIGS)
    verdict(8, "determinism", ok, f"{compared} CSV files compared across two strict runs, {len(mismatched)} differ")


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(pytest.main([__file__, "-s", "-q"]))
