"""Configuration-driven scenario runner.

    fracflow run CONFIG.toml

The config has sections [mesh], [data], [solver], [scenario] and [output]
(see README).  On failure a single line ``FAIL <kind>: <reason>`` goes to
stderr and the exit status is nonzero.
"""

from __future__ import annotations

import argparse
import sys
import time
from contextlib import nullcontext
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from . import io
from .assembly import assemble_linear
from .mesh import MeshError, Rectangle, build_mesh, refine
from .mixed_space import SpaceError, build_single_domain_space, build_space
from .problem_data import Law, ProblemData, ScalarField, StructuralError, TensorField, validate
from .solver import SingularSystemError, SolveReport, SolverError, SolverOptions, solve_picard

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

SCENARIOS = ("solve", "uniform-flow", "beta-sweep", "mms", "infsup", "inequalities")

EXIT_CONFIG = 2
EXIT_VALIDATION = 3
EXIT_SOLVER = 4


class ConfigError(ValueError):
    pass


class ValidationFailure(ValueError):
    pass


@dataclass(frozen=True)
class MeshConfig:
    x0: float = 0.0
    x1: float = 2.0
    y0: float = 0.0
    y1: float = 1.0
    fracture_x: float | None = 1.0
    nx: int = 8
    ny: int = 4
    refinements: int = 0

    @property
    def domain(self) -> Rectangle:
        return Rectangle(self.x0, self.x1, self.y0, self.y1)


@dataclass(frozen=True)
class OutputConfig:
    directory: Path = Path("results")
    csv: bool = True
    vtk: bool = False
    matrix: bool = False


@dataclass(frozen=True)
class RunConfig:
    mesh: MeshConfig
    data: dict
    solver: SolverOptions
    strict: bool
    scenario: str
    scenario_options: dict
    output: OutputConfig
    source: Path | None = None


DATA_KEYS = {
    "alpha", "alpha1", "alpha2", "alpha_gamma", "beta", "beta1", "beta2", "beta_gamma",
    "kappa", "xi", "q", "q1", "q2", "q_gamma", "p_d", "p_d1", "p_d2", "p_d_gamma",
    "law1", "law2", "law_gamma",
}
SCENARIO_KEYS = {
    "solve": set(),
    "uniform-flow": {"p_left", "p_right"},
    "beta-sweep": {"betas", "sweep", "p_left", "p_right"},
    "mms": {"refinements", "beta"},
    "infsup": {"sizes"},
    "inequalities": {"samples", "dims", "seed"},
}


def _take(section: dict, name: str, allowed: set) -> dict:
    unknown = sorted(set(section) - allowed)
    if unknown:
        raise ConfigError(f"[{name}] unknown key(s): {', '.join(unknown)}")
    return section


def _typed(cls, section: dict, name: str, conv=None):
    conv = conv or {}
    kw = {}
    names = {f.name: f for f in fields(cls)}
    _take(section, name, set(names))
    for k, v in section.items():
        try:
            kw[k] = conv[k](v) if k in conv else v
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"[{name}] {k}: {exc}") from None
    try:
        return cls(**kw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"[{name}] {exc}") from None


def _fracture(v):
    if v is None or (isinstance(v, str) and v.lower() == "none"):
        return None
    return float(v)


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        raw = tomllib.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    _take(raw, "top level", {"mesh", "data", "solver", "scenario", "output"})

    mesh_raw = dict(raw.get("mesh", {}))
    if "extents" in mesh_raw:
        ext = mesh_raw.pop("extents")
        if not (isinstance(ext, list) and len(ext) == 4):
            raise ConfigError("[mesh] extents must be [x0, x1, y0, y1]")
        mesh_raw.update(zip(("x0", "x1", "y0", "y1"), ext))
    mesh = _typed(
        MeshConfig,
        mesh_raw,
        "mesh",
        {"x0": float, "x1": float, "y0": float, "y1": float, "fracture_x": _fracture,
         "nx": int, "ny": int, "refinements": int},
    )

    data = dict(_take(dict(raw.get("data", {})), "data", DATA_KEYS))

    solver_raw = dict(raw.get("solver", {}))
    strict = bool(solver_raw.pop("strict", False))
    solver = _typed(SolverOptions, solver_raw, "solver")

    scen = dict(raw.get("scenario", {}))
    kind = scen.pop("type", None)
    if kind not in SCENARIOS:
        raise ConfigError(f"[scenario] type must be one of {', '.join(SCENARIOS)}, got {kind!r}")
    _take(scen, "scenario", SCENARIO_KEYS[kind])

    out_raw = dict(raw.get("output", {}))
    output = _typed(OutputConfig, out_raw, "output", {"directory": Path})
    if not output.directory.is_absolute():
        output = OutputConfig(path.parent / output.directory, output.csv, output.vtk, output.matrix)
    return RunConfig(mesh, data, solver, strict, kind, scen, output, path)


# building blocks


def make_mesh(cfg: MeshConfig, fracture=True):
    try:
        mesh = build_mesh(cfg.domain, cfg.fracture_x if fracture else None, cfg.nx, cfg.ny)
        for _ in range(cfg.refinements):
            mesh = refine(mesh)
    except MeshError as exc:
        raise ConfigError(f"[mesh] {exc}") from None
    return mesh


def _region_array(v, n, name):
    a = np.asarray(v, dtype=float)
    if a.ndim == 0:
        return float(a)
    if a.shape != (n,):
        raise ConfigError(f"[data] {name}: expected a constant or {n} values, got {a.shape}")
    return a


def make_data(values: dict, mesh) -> ProblemData:
    """ProblemData from config values: constants or per-cell lists; plain
    ``alpha``/``beta``/``q``/``p_d`` apply to both subdomains."""
    v = dict(values)
    try:
        base = ProblemData.uniform(
            alpha=v.pop("alpha", 1.0),
            beta=v.pop("beta", 0.0),
            alpha_gamma=v.pop("alpha_gamma", 1.0),
            beta_gamma=v.pop("beta_gamma", 1.0),
            kappa=v.pop("kappa", 1.0),
            xi=v.pop("xi", 0.75),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"[data] {exc}") from None
    n = {"1": len(mesh.triangles_of(1)), "2": len(mesh.triangles_of(2))}
    nb = {"1": len(mesh.boundary_edges(1)), "2": len(mesh.boundary_edges(2))}
    nf = len(mesh.fracture_segments)
    ch = {}
    q = v.pop("q", None)
    p_d = v.pop("p_d", None)
    for i in "12":
        if f"alpha{i}" in v:
            ch[f"alpha{i}"] = TensorField(np.asarray(v.pop(f"alpha{i}"), dtype=float))
        if f"beta{i}" in v:
            ch[f"beta{i}"] = ScalarField(_region_array(v.pop(f"beta{i}"), n[i], f"beta{i}"))
        qi = v.pop(f"q{i}", q)
        if qi is not None:
            ch[f"q{i}"] = _region_array(qi, n[i], f"q{i}")
        pi = v.pop(f"p_d{i}", p_d)
        if pi is not None:
            ch[f"p_d{i}"] = _region_array(pi, nb[i], f"p_d{i}")
    if "q_gamma" in v:
        ch["q_gamma"] = _region_array(v.pop("q_gamma"), nf, "q_gamma")
    pdg = v.pop("p_d_gamma", p_d)
    if pdg is not None:
        pdg = np.asarray(pdg, dtype=float)
        ch["p_d_gamma"] = (float(pdg), float(pdg)) if pdg.ndim == 0 else tuple(float(x) for x in pdg)
    for k in ("law1", "law2", "law_gamma"):
        if k in v:
            try:
                ch[k] = Law(str(v.pop(k)).lower())
            except ValueError:
                raise ConfigError(f"[data] {k} must be 'darcy' or 'forchheimer'") from None
    if {"beta1", "beta2"} & set(ch) and not {"law1", "law2"} & set(values):
        for i in "12":
            if f"beta{i}" in ch:
                ch[f"law{i}"] = Law.FORCHHEIMER if np.any(ch[f"beta{i}"].values > 0) else Law.DARCY
    return base.replace(**ch)


def _check(data, mesh):
    try:
        problems = validate(data, mesh)
    except StructuralError as exc:
        raise ValidationFailure(str(exc)) from None
    if problems:
        raise ValidationFailure("; ".join(str(p) for p in problems))


def _scalar_coefficient(value, name):
    a = np.asarray(value.values if hasattr(value, "values") else value, dtype=float)
    if a.ndim == 2:
        if not np.allclose(a, a[0, 0] * np.eye(2)):
            raise ConfigError(f"[data] {name} must be isotropic for this scenario")
        return float(a[0, 0])
    if a.size != 1:
        raise ConfigError(f"[data] {name} must be a constant for this scenario")
    a = a.reshape(())
    return float(a)


# scenarios


@dataclass
class Outcome:
    report_rows: list
    report_schema: tuple
    solve_reports: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)  # file name -> (rows, schema)
    space: object = None
    state: object = None
    system: object = None


def _run_solve(cfg: RunConfig) -> Outcome:
    mesh = make_mesh(cfg.mesh, cfg.mesh.fracture_x is not None)
    space = build_space(mesh) if mesh.has_fracture else build_single_domain_space(mesh)
    data = make_data(cfg.data, mesh)
    _check(data, mesh)
    system = assemble_linear(space, data)
    state, report = solve_picard(space, data, cfg.solver, system=system)
    from .analysis.norms import compute_norms

    nb = compute_norms(space, data, state).as_dict()
    schema = ("status", "iterations") + tuple(nb)
    row = {"status": report.status, "iterations": report.iterations, **nb}
    return Outcome([row], schema, [report], space=space, state=state, system=system)


def _run_uniform_flow(cfg: RunConfig) -> Outcome:
    from .analysis.oracle import uniform_flow_data, uniform_flow_oracle

    m = cfg.mesh
    if m.fracture_x is None:
        raise ConfigError("[mesh] uniform-flow needs a fracture_x")
    mesh = make_mesh(m)
    space = build_space(mesh)
    probe = make_data(cfg.data, mesh)
    a1 = _scalar_coefficient(probe.alpha1, "alpha1")
    a2 = _scalar_coefficient(probe.alpha2, "alpha2")
    b1 = _scalar_coefficient(probe.effective_beta("1", 1), "beta1")
    b2 = _scalar_coefficient(probe.effective_beta("2", 1), "beta2")
    kap = _scalar_coefficient(probe.kappa, "kappa")
    pl = float(cfg.scenario_options.get("p_left", 3.0))
    pr = float(cfg.scenario_options.get("p_right", 0.0))
    flow = uniform_flow_oracle(a1, a2, b1, b2, kap, probe.xi, (m.fracture_x - m.x0, m.x1 - m.fracture_x), pl - pr, pl, m.x0)
    data = uniform_flow_data(mesh, flow).replace(
        **{k: getattr(probe, k) for k in ("alpha1", "alpha2", "alpha_gamma", "beta1", "beta2", "beta_gamma",
                                         "kappa", "xi", "law1", "law2", "law_gamma")}
    )
    _check(data, mesh)
    system = assemble_linear(space, data)
    state, report = solve_picard(space, data, cfg.solver, system=system)
    L = mesh.segment_lengths()
    traces = np.concatenate([state.u[space.frac_dofs1] / L, state.u[space.frac_dofs2] / L])
    pg = state.p[mesh.n_triangles :]
    row = dict(
        U_fem=float(traces.mean()),
        U_oracle=flow.U,
        abs_err=float(np.abs(traces - flow.U).max()),
        p_gamma_fem=float(pg.mean()),
        p_gamma_oracle=flow.p_gamma,
        p_gamma_err=float(np.abs(pg - flow.p_gamma).max()),
        iterations=report.iterations,
    )
    return Outcome([row], tuple(row), [report], space=space, state=state, system=system)


def _run_beta_sweep(cfg: RunConfig) -> Outcome:
    from .analysis.sweep import uniform_flow_sweep

    m = cfg.mesh
    probe = make_data(cfg.data, make_mesh(m, m.fracture_x is not None))
    opts = cfg.scenario_options
    betas = [float(b) for b in opts.get("betas", [10.0**-k for k in range(7)])]
    sweep = opts.get("sweep", "fractured")
    if m.refinements:
        raise ConfigError("[mesh] refinements are not used by beta-sweep; set nx, ny")
    try:
        res = uniform_flow_sweep(
            betas,
            sweep,
            m.nx,
            m.ny,
            alpha=_scalar_coefficient(probe.alpha1, "alpha1"),
            kappa=_scalar_coefficient(probe.kappa, "kappa"),
            beta_gamma=_scalar_coefficient(probe.beta_gamma, "beta_gamma"),
            xi=probe.xi,
            p_left=float(opts.get("p_left", 3.0)),
            p_right=float(opts.get("p_right", 0.0)),
            domain=m.domain,
            options=cfg.solver,
        )
    except ValueError as exc:
        raise ConfigError(f"[scenario] {exc}") from None
    out = Outcome(res.to_rows(), res.SCHEMA, res.reports)
    if res.aborted:
        out.extra["_failure"] = res.message
    return out


def _run_mms(cfg: RunConfig) -> Outcome:
    from .analysis.mms import SmoothSolution, mms_convergence

    m = cfg.mesh
    if m.fracture_x is None:
        raise ConfigError("[mesh] mms needs a fracture_x")
    mesh = make_mesh(m)
    probe = make_data(cfg.data, mesh)
    opts = cfg.scenario_options
    beta = float(opts.get("beta", _scalar_coefficient(probe.effective_beta("1", 1), "beta")))
    coef = dict(
        alpha=_scalar_coefficient(probe.alpha1, "alpha1"),
        beta=beta,
        kappa=_scalar_coefficient(probe.kappa, "kappa"),
        xi=probe.xi,
        alpha_gamma=_scalar_coefficient(probe.alpha_gamma, "alpha_gamma"),
        beta_gamma=_scalar_coefficient(probe.effective_beta("gamma", 1), "beta_gamma"),
    )
    sol = SmoothSolution(xf=m.fracture_x, **coef)
    template = ProblemData.uniform(**coef)
    table = mms_convergence(
        int(opts.get("refinements", 4)),
        template,
        sol,
        m.domain,
        m.fracture_x,
        (m.nx, m.ny),
        cfg.solver,
    )
    slopes = dict(
        flux_slope=table.flux_slope,
        pressure_slope=table.pressure_slope,
        pressure_pointwise_slope=table.pressure_pointwise_slope,
        monotone=table.monotone,
    )
    out = Outcome(table.to_rows(), table.SCHEMA)
    out.extra["slopes.csv"] = ([slopes], tuple(slopes))
    return out


def _run_infsup(cfg: RunConfig) -> Outcome:
    from .analysis.infsup import InfSupError, infsup_study

    m = cfg.mesh
    sizes = [tuple(int(k) for k in s) for s in cfg.scenario_options.get("sizes", [[2, 1], [4, 2], [8, 4]])]
    try:
        res = infsup_study(sizes, m.domain, m.fracture_x)
    except (InfSupError, MeshError) as exc:
        raise ConfigError(f"[scenario] {exc}") from None
    schema = ("nx", "ny", "h", "n_dofs", "theta", "lambda_min", "lambda_max")
    rows = [{k: getattr(r, k) for k in schema} for r in res]
    return Outcome(rows, schema)


def _run_inequalities(cfg: RunConfig) -> Outcome:
    from .analysis.inequalities import InequalityRow, check_vector_inequalities

    o = cfg.scenario_options
    try:
        rows = check_vector_inequalities(int(o.get("samples", 100_000)), o.get("dims", [1, 2, 3]), int(o.get("seed", 0)))
    except ValueError as exc:
        raise ConfigError(f"[scenario] {exc}") from None
    return Outcome([r.to_row() for r in rows], InequalityRow.SCHEMA)


RUNNERS = {
    "solve": _run_solve,
    "uniform-flow": _run_uniform_flow,
    "beta-sweep": _run_beta_sweep,
    "mms": _run_mms,
    "infsup": _run_infsup,
    "inequalities": _run_inequalities,
}


def _write(cfg: RunConfig, out: Outcome):
    d = cfg.output.directory
    d.mkdir(parents=True, exist_ok=True)
    if cfg.output.csv:
        io.emit_csv(out.report_rows, out.report_schema, d / "report.csv")
        rows = []
        for r in out.solve_reports:
            row = r.to_row()
            if cfg.strict:
                row["wall_time"] = 0.0
            rows.append(row)
        io.emit_csv(rows, SolveReport.SCHEMA, d / "solve.csv")
        for name, (rows, schema) in out.extra.items():
            if not name.startswith("_"):
                io.emit_csv(rows, schema, d / name)
    if cfg.output.vtk and out.state is not None:
        io.write_vtk(d / "fields.vtk", out.space, out.state)
    if cfg.output.matrix and out.system is not None:
        io.write_matrix(d / "system.mtx", out.system.kkt(out.system.flux_operator(out.state.u)))


def _limits(strict: bool):
    if not strict:
        return nullcontext()
    from threadpoolctl import threadpool_limits

    return threadpool_limits(limits=1)


def run(config_path) -> int:
    """Run one configuration; returns the process exit status."""

    def fail(kind, msg, code):
        print(f"FAIL {kind}: {msg}", file=sys.stderr)
        return code

    try:
        cfg = load_config(config_path)
    except ConfigError as exc:
        return fail("config", exc, EXIT_CONFIG)
    t0 = time.perf_counter()
    try:
        with _limits(cfg.strict):
            out = RUNNERS[cfg.scenario](cfg)
            _write(cfg, out)
    except ConfigError as exc:
        return fail("config", exc, EXIT_CONFIG)
    except (ValidationFailure, SpaceError) as exc:
        return fail("validation", exc, EXIT_VALIDATION)
    except SolverError as exc:
        if exc.report is not None and cfg.output.csv:
            io.emit_csv([exc.report.to_row()], SolveReport.SCHEMA, cfg.output.directory / "solve.csv")
        return fail("solver", exc, EXIT_SOLVER)
    except SingularSystemError as exc:
        return fail("solver", exc, EXIT_SOLVER)
    except OSError as exc:
        return fail("output", exc, EXIT_CONFIG)
    if "_failure" in out.extra:
        return fail("solver", out.extra["_failure"], EXIT_SOLVER)
    if not cfg.strict:
        print(f"{cfg.scenario}: ok ({time.perf_counter() - t0:.2f} s) -> {cfg.output.directory}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="fracflow", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("run", help="run the scenario described by a TOML config")
    p.add_argument("config", type=Path)
    args = parser.parse_args(argv)
    return run(args.config)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
