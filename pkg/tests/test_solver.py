import numpy as np
import pytest

from fracflow import ProblemData, SolverOptions, assemble_linear, residual, solve_linear_saddle, solve_picard, solve_uzawa
from fracflow.analysis.oracle import uniform_flow_data, uniform_flow_oracle
from fracflow.mixed_space import DiscreteState
from fracflow.solver import SingularSystemError
from fracflow.problem_data import ScalarField, TensorField


def _uniform(mesh, beta):
    flow = uniform_flow_oracle(1.0, 1.0, beta, beta, 0.5, 0.75, (1.0, 1.0), 3.0, 3.0)
    return flow, uniform_flow_data(mesh, flow, alpha=1.0, beta=beta, kappa=0.5, beta_gamma=1.0)


def test_options_validation():
    with pytest.raises(ValueError):
        SolverOptions(tol_rel=0)
    with pytest.raises(ValueError):
        SolverOptions(max_iter=0)
    with pytest.raises(ValueError):
        SolverOptions(damping=1.5)
    with pytest.raises(ValueError):
        SolverOptions(backend="cg")


def test_linear_solve_residual(space84, rng):
    n1 = len(space84.mesh.triangles_of(1))
    a = rng.normal(size=(n1, 2, 2)) * 0.2
    alpha = np.eye(2) + np.einsum("tij,tkj->tik", a, a)
    d = ProblemData.uniform(kappa=0.5, q1=1.0, p_d=0.3, beta_gamma=0.0).replace(alpha1=TensorField(alpha))
    sys_ = assemble_linear(space84, d)
    st = solve_linear_saddle(sys_)
    r = residual(sys_, st)
    scale = np.abs(sys_.g_vec).max() + np.abs(sys_.f_vec).max()
    assert r.flux_max <= 1e-11 * scale and r.mass_max <= 1e-11 * scale


def test_picard_linear_is_one_solve(space84):
    d = ProblemData.uniform(kappa=0.5, q_gamma=1.0, p_d1=1.0, beta_gamma=0.0)
    assert d.is_linear
    st, rep = solve_picard(space84, d)
    ref = solve_linear_saddle(assemble_linear(space84, d))
    assert rep.iterations == 1 and rep.converged
    assert np.array_equal(st.u, ref.u) and np.array_equal(st.p, ref.p)


def test_uniform_flow_darcy_and_uzawa(space84):
    flow, d = _uniform(space84.mesh, 0.0)
    sys_ = assemble_linear(space84, d)
    st = solve_linear_saddle(sys_)
    L = space84.mesh.segment_lengths()
    assert np.allclose(st.u[space84.frac_dofs1] / L, flow.U, atol=1e-10)
    uz, rep = solve_uzawa(sys_)
    assert rep.converged
    assert np.abs(uz.u - st.u).max() <= 1e-9 and np.abs(uz.p - st.p).max() <= 1e-9


def test_uzawa_trivial_cases(space84):
    sys_ = assemble_linear(space84, ProblemData.uniform(p_d=2.0))
    st, rep = solve_uzawa(sys_)
    assert rep.iterations <= 2
    assert np.abs(st.u).max() <= 1e-12 and np.allclose(st.p, 2.0)
    st0, _ = solve_uzawa(assemble_linear(space84, ProblemData.uniform()))
    assert np.abs(st0.u).max() == 0 and np.abs(st0.p).max() == 0


def test_picard_uniform_forchheimer(space84):
    flow, d = _uniform(space84.mesh, 1.0)
    # positive root of U^2 + 1.5 U = 1.5, independently
    root = max(np.roots([1.0, 1.5, -1.5]).real)
    assert flow.U == pytest.approx(root, rel=1e-14)
    st, rep = solve_picard(space84, d, SolverOptions(tol_rel=1e-12, tol_abs=1e-13))
    assert rep.converged and rep.iterations <= 30
    L = space84.mesh.segment_lengths()
    assert np.allclose(st.u[space84.frac_dofs2] / L, root, atol=1e-8)


def test_picard_start_independence(space84, forch_data, rng):
    d = forch_data.replace(q_gamma=1.0, p_d1=1.0, p_d_gamma=(0.5, 0.5))
    opts = SolverOptions(tol_rel=1e-13, tol_abs=1e-13, max_iter=200)
    a, _ = solve_picard(space84, d, SolverOptions(tol_rel=1e-13, tol_abs=1e-13, max_iter=200, initial_state="zero"))
    init = DiscreteState(rng.normal(size=space84.n_flux), rng.normal(size=space84.n_pressure))
    b, rep = solve_picard(space84, d, SolverOptions(**{**opts.__dict__, "initial_state": "given"}), initial=init)
    assert rep.converged
    assert np.abs(a.u - b.u).max() <= 1e-10 and np.abs(a.p - b.p).max() <= 1e-10


def test_picard_uzawa_backend(space84, forch_data):
    d = forch_data.replace(q_gamma=1.0, p_d1=1.0)
    a, _ = solve_picard(space84, d, SolverOptions(tol_rel=1e-12))
    b, rep = solve_picard(space84, d, SolverOptions(tol_rel=1e-12, backend="uzawa"))
    assert rep.converged and np.abs(a.u - b.u).max() <= 1e-9


def test_max_iter_is_nonfatal(space84, forch_data):
    d = forch_data.replace(q_gamma=1.0, p_d1=3.0)
    st, rep = solve_picard(space84, d, SolverOptions(tol_rel=1e-14, tol_abs=1e-16, max_iter=2))
    assert rep.max_iter_reached and not rep.converged and rep.iterations == 2
    assert rep.status == "max_iter" and rep.warnings
    assert rep.residual_history[-1] < rep.residual_history[0]


def test_given_requires_state(space84, forch_data):
    with pytest.raises(ValueError):
        solve_picard(space84, forch_data, SolverOptions(initial_state="given"))


def test_singular_system_reported(space42):
    zero = ScalarField(0.0)
    d = ProblemData.uniform().replace(alpha1=TensorField(0.0), alpha2=TensorField(0.0), alpha_gamma=zero, kappa=zero)
    with pytest.raises(SingularSystemError, match="zero pivot") as info:
        solve_linear_saddle(assemble_linear(space42, d))
    assert info.value.pivot is not None


def test_report_row(space84, forch_data):
    _, rep = solve_picard(space84, forch_data.replace(p_d1=1.0))
    row = rep.to_row()
    assert tuple(row) == rep.SCHEMA
    assert row["u_l2"] > 0 and row["p_l32"] > 0
