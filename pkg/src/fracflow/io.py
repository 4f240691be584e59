"""Result files: CSV tables, legacy-VTK fields and MatrixMarket dumps."""

from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np
import scipy.io

from .mixed_space import DiscreteState, MixedSpace, divergence, flux_values

FLOAT_FORMAT = "%.16e"  # 17 significant digits, round-trips binary64


def format_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return FLOAT_FORMAT % v
    return str(v)


def emit_csv(rows, schema, path) -> Path:
    """Write ``rows`` (dicts keyed exactly by ``schema``) with a header."""
    schema = list(schema)
    path = Path(path)
    lines = []
    for i, row in enumerate(rows):
        if set(row) != set(schema):
            missing = sorted(set(schema) - set(row))
            extra = sorted(set(row) - set(schema))
            raise ValueError(f"row {i} does not match the schema (missing {missing}, extra {extra})")
        lines.append([format_value(row[k]) for k in schema])
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(schema)
        w.writerows(lines)
    return path


def read_csv(path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def write_matrix(path, matrix) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    scipy.io.mmwrite(str(path), matrix.tocoo(), symmetry="general", precision=17)
    return path


def write_vtk(path, space: MixedSpace, state: DiscreteState) -> Path:
    """Legacy ASCII unstructured grid: triangles plus fracture segments,
    with cell pressure, cell-centre velocity, divergence and region tag."""
    mesh = space.mesh
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    nt, nf = mesh.n_triangles, space.n_segments
    segs = mesh.edges[mesh.fracture_segments] if nf else np.empty((0, 2), dtype=int)
    vel = flux_values(space, state.u, np.full((1, 3), 1.0 / 3.0))[:, 0, :]
    div = divergence(space, state.u)
    if nf:
        g = state.u[space.gamma_dofs]
        ug = 0.5 * (g[:-1] + g[1:])
        L = mesh.segment_lengths()
        divg = (g[1:] - g[:-1] - (state.u[space.frac_dofs1] - state.u[space.frac_dofs2])) / L
    else:
        ug = divg = np.empty(0)
    f = format_value
    out = ["# vtk DataFile Version 3.0", "fractured flow fields", "ASCII", "DATASET UNSTRUCTURED_GRID"]
    out.append(f"POINTS {mesh.n_vertices} double")
    out += [f"{f(x)} {f(y)} {f(0.0)}" for x, y in mesh.vertices]
    out.append(f"CELLS {nt + nf} {4 * nt + 3 * nf}")
    out += [f"3 {a} {b} {c}" for a, b, c in mesh.triangles]
    out += [f"2 {a} {b}" for a, b in segs]
    out.append(f"CELL_TYPES {nt + nf}")
    out += ["5"] * nt + ["3"] * nf
    out.append(f"CELL_DATA {nt + nf}")
    out += ["SCALARS pressure double 1", "LOOKUP_TABLE default"]
    out += [f(v) for v in state.p]
    out += ["SCALARS divergence double 1", "LOOKUP_TABLE default"]
    out += [f(v) for v in np.concatenate([div, divg])]
    out += ["SCALARS region int 1", "LOOKUP_TABLE default"]
    out += [str(int(s)) for s in mesh.subdomain] + ["0"] * nf
    out.append("VECTORS velocity double")
    out += [f"{f(vx)} {f(vy)} {f(0.0)}" for vx, vy in vel]
    out += [f"{f(0.0)} {f(v)} {f(0.0)}" for v in ug]
    path.write_text("\n".join(out) + "\n", encoding="utf-8")
    return path
