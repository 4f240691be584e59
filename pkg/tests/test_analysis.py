import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fracflow import ProblemData, build_mesh, build_space
from fracflow.analysis.inequalities import INEQUALITIES, check_vector_inequalities, violations
from fracflow.analysis.infsup import discrete_infsup, flux_gram, infsup_constant, pressure_mass
from fracflow.analysis.mms import ConvergenceError, discretization_errors, fitted_slope, manufactured_data
from fracflow.analysis.monotonicity import discrete_monotonicity
from fracflow.analysis.norms import compute_norms
from fracflow.analysis.oracle import OracleError, UniformFlowSolution, uniform_flow_data, uniform_flow_oracle
from fracflow.analysis.sweep import beta_sweep
from fracflow.assembly import assemble_linear
from fracflow.mesh import Rectangle
from fracflow.mixed_space import DiscreteState, build_single_domain_space, interpolate
from fracflow.solver import SolverOptions, solve_picard

# inequalities


def test_equality_cases():
    x = np.array([[1.5, -2.0]])
    for name in ("monotone", "root_monotone"):
        lhs, rhs = INEQUALITIES[name](x, x.copy())
        assert lhs[0] == 0 and rhs[0] == 0


def test_tight_growth_case():
    lhs, rhs = INEQUALITIES["growth"](np.array([[1.0, 0.0]]), np.zeros((1, 2)))
    assert lhs[0] == 1.0 and rhs[0] == 1.0


def test_origin_continuation():
    lhs, rhs = INEQUALITIES["root_holder"](np.zeros((1, 3)), np.zeros((1, 3)))
    assert lhs[0] == 0 and rhs[0] == 0


def test_sampler_reports_rows():
    rows = check_vector_inequalities(2000, [2], seed=3)
    assert [r.name for r in rows] == list(INEQUALITIES)
    assert all(r.violations == 0 for r in rows)
    with pytest.raises(ValueError):
        check_vector_inequalities(10, [4])


def test_violation_detector():
    assert violations(np.array([1.0 + 1e-6]), np.array([1.0]))[0]
    assert not violations(np.array([1.0 + 1e-13]), np.array([1.0]))[0]


vec = st.lists(st.floats(-1e3, 1e3, allow_nan=False), min_size=2, max_size=2)


@settings(max_examples=300, deadline=None)
@given(vec, vec)
def test_inequalities_property(x, y):
    x, y = np.array([x]), np.array([y])
    for fn in INEQUALITIES.values():
        lhs, rhs = fn(x, y)
        assert not violations(lhs, rhs)[0]


# norms


def test_norms_zero_state(space42):
    nb = compute_norms(space42, None, DiscreteState.zeros(space42))
    assert all(v == 0 for v in nb.as_dict().values())


def test_norms_unit_square_constants():
    mesh = build_mesh(Rectangle(0, 1, 0, 1), None, 3, 3)
    space = build_single_domain_space(mesh)
    u = interpolate(space, lambda s, x, y: (np.ones_like(x), np.zeros_like(x)))
    c = -2.5
    nb = compute_norms(space, None, DiscreteState(u, np.full(space.n_pressure, c)))
    assert nb.u1_l2 == pytest.approx(1.0, rel=1e-13)
    assert nb.u1_l3 == pytest.approx(1.0, rel=1e-13)
    assert nb.p1_l32 == pytest.approx(abs(c), rel=1e-13)
    assert nb.div1_l2 == pytest.approx(0.0, abs=1e-13)


def test_norm_embedding(space42, rng):
    area = 2.0
    for _ in range(20):
        s = DiscreteState(rng.normal(size=space42.n_flux), rng.normal(size=space42.n_pressure))
        nb = compute_norms(space42, None, s)
        a1 = space42.mesh.areas[space42.mesh.triangles_of(1)].sum()
        assert nb.u1_l2 <= a1 ** (1 / 6) * nb.u1_l3 * (1 + 1e-12)
        # L^{3/2} <= |O|^{1/6} L^2 for pressures
        assert nb.p1_l32 <= a1 ** (1 / 6) * nb.p1_l2 * (1 + 1e-12)
        assert nb.flux_l2 <= (area + 1.0) ** (1 / 6) * nb.flux_l3 * (1 + 1e-12)


def test_fracture_divergence_norm(space42):
    d = ProblemData.uniform(q_gamma=2.0, p_d=0.0)
    st_, _ = solve_picard(space42, d.replace(beta_gamma=d.beta_gamma), SolverOptions(tol_rel=1e-12))
    nb = compute_norms(space42, d, st_)
    assert nb.divgamma_l2 == pytest.approx(2.0, rel=1e-10)
    assert nb.div1_l2 == pytest.approx(0.0, abs=1e-10)


# inf-sup


def test_infsup_positive_small_mesh():
    r = discrete_infsup(build_space(build_mesh((0, 2, 0, 1), 1.0, 2, 1)))
    assert r.theta > 0


def test_infsup_detects_defect(space42):
    B = assemble_linear(space42, ProblemData.uniform()).B.toarray()
    B = np.vstack([B, np.zeros(B.shape[1])])
    m = np.append(pressure_mass(space42), 1.0)
    theta, _, _ = infsup_constant(B, flux_gram(space42), m)
    assert theta == 0.0


def test_infsup_gram_bounds_divergence(space42):
    """The flux Gram matrix dominates the divergence part, so eigenvalues lie in (0, 1]."""
    r = discrete_infsup(space42)
    assert 0 < r.lambda_min <= r.lambda_max <= 1 + 1e-12


# uniform-flow oracle


def test_oracle_darcy_example():
    f = uniform_flow_oracle(1, 1, 0, 0, 0.5, 0.75, (1, 1), 3.0, p_left=3.0)
    assert f.U == pytest.approx(1.0, rel=1e-15)
    assert f.p_gamma == pytest.approx(1.5, rel=1e-15)
    assert f.pressure(2.0) == pytest.approx(0.0, abs=1e-15)
    assert f.p1_at_gamma() - f.p2_at_gamma() == pytest.approx(2 * 0.5 * f.U)


def test_oracle_forchheimer_example():
    f = uniform_flow_oracle(1, 1, 1, 1, 0.5, 0.75, (1, 1), 3.0)
    assert f.U**2 + 1.5 * f.U == pytest.approx(1.5, rel=1e-14)
    assert f.U > 0
    g = uniform_flow_oracle(1, 1, 1, 1, 0.5, 0.75, (1, 1), -3.0)
    assert g.U == pytest.approx(-f.U, rel=1e-15)


def test_oracle_zero_drop_and_errors():
    f = uniform_flow_oracle(1, 2, 1, 1, 0.5, dp=0.0, p_left=1.0)
    assert f.U == 0 and np.allclose(f.pressure(np.linspace(0, 2, 5)), 1.0)
    with pytest.raises(OracleError):
        uniform_flow_oracle(-1, -1, 0, 0, 0.0)


def test_uniform_solution_exact_in_space(space42):
    """Uniform flow lies in the discrete space: errors at round-off."""
    flow = uniform_flow_oracle(1, 1, 0, 0, 0.5, 0.75, (1, 1), 3.0, 3.0)
    sol = UniformFlowSolution(flow)
    d = uniform_flow_data(space42.mesh, flow, alpha=1.0, kappa=0.5, beta_gamma=0.0)
    data, _ = manufactured_data(space42, sol, d)
    st_, _ = solve_picard(space42, data)
    eu, ep, epp = discretization_errors(space42, st_, sol)
    assert eu < 1e-12 and ep < 1e-12


def test_slope_fit():
    h = np.array([0.4, 0.2, 0.1, 0.05])
    assert fitted_slope(h, 3 * h**1.5) == pytest.approx(1.5)
    with pytest.raises(ConvergenceError):
        fitted_slope([0.1], [0.2])
    with pytest.raises(ConvergenceError):
        fitted_slope([0.1, 0.05], [0.2, 0.1])


# beta sweep


def test_hydrostatic_sweep(space42):
    d = ProblemData.uniform(p_d=0.0, kappa=0.5)
    res = beta_sweep(space42, d, [1.0, 0.1, 0.01])
    assert not res.aborted
    for name in res.SCHEMA:
        if name not in ("beta", "iterations"):
            assert np.all(res.column(name) == 0), name


def test_sweep_argument_checks(space42):
    d = ProblemData.uniform()
    with pytest.raises(ValueError):
        beta_sweep(space42, d, [0.1, 1.0])
    with pytest.raises(ValueError):
        beta_sweep(space42, d, [1.0], scenario="single")


# discrete monotonicity


def test_monotonicity_small(space42, forch_data):
    res = discrete_monotonicity(space42, forch_data, pairs=50, seed=2)
    assert res.failures == 0 and res.min_ratio > 0
