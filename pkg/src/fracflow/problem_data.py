"""Coefficients and data of the fractured Darcy / Darcy-Forchheimer model.

All fields are constant per cell (triangles of a subdomain, or segments of the
fracture).  Dirichlet pressures are edge averages on the outer boundary and
point values at the two fracture tips.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .mesh import Mesh


class Law(str, Enum):
    DARCY = "darcy"
    FORCHHEIMER = "forchheimer"


class StructuralError(ValueError):
    """Field sizes inconsistent with the mesh."""


@dataclass(frozen=True)
class Violation:
    field: str
    index: int | None
    bound: str
    value: float

    def __str__(self):
        where = self.field if self.index is None else f"{self.field}[{self.index}]"
        return f"{where}={self.value:.6g} violates {self.bound}"


@dataclass(frozen=True)
class TensorField:
    """Symmetric 2x2 tensors, either one constant tensor or one per cell.

    ``lower`` is the declared uniform lower bound on the eigenvalues.
    """

    values: np.ndarray
    lower: float = 1e-12

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim == 0:
            v = float(v) * np.eye(2)
        object.__setattr__(self, "values", v)

    @property
    def is_constant(self) -> bool:
        return self.values.ndim == 2

    def expand(self, n: int) -> np.ndarray:
        if self.is_constant:
            return np.broadcast_to(self.values, (n, 2, 2)).copy()
        return self.values


@dataclass(frozen=True)
class ScalarField:
    """Nonnegative scalars, constant or one per cell, within [lower, upper]."""

    values: np.ndarray | float
    lower: float = 0.0
    upper: float = np.inf
    strict: bool = False

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))

    @property
    def is_constant(self) -> bool:
        return self.values.ndim == 0

    def expand(self, n: int) -> np.ndarray:
        if self.is_constant:
            return np.full(n, float(self.values))
        return self.values


def _scalar(v, **kw) -> ScalarField:
    return v if isinstance(v, ScalarField) else ScalarField(v, **kw)


def _tensor(v) -> TensorField:
    return v if isinstance(v, TensorField) else TensorField(v)


@dataclass(frozen=True)
class ProblemData:
    """Every coefficient and data field of the model on a given mesh.

    Per-cell arrays are ordered by increasing triangle index within each
    subdomain, per-segment arrays bottom to top along the fracture, and the
    boundary pressures ``p_d1``/``p_d2`` follow ``mesh.boundary_edges(i)``.
    ``p_d_gamma`` holds the fracture-tip pressures (bottom, top).
    """

    alpha1: TensorField
    alpha2: TensorField
    alpha_gamma: ScalarField
    beta1: ScalarField
    beta2: ScalarField
    beta_gamma: ScalarField
    kappa: ScalarField
    xi: float
    q1: np.ndarray | float = 0.0
    q2: np.ndarray | float = 0.0
    q_gamma: np.ndarray | float = 0.0
    p_d1: np.ndarray | float = 0.0
    p_d2: np.ndarray | float = 0.0
    p_d_gamma: tuple[float, float] = (0.0, 0.0)
    law1: Law = Law.DARCY
    law2: Law = Law.DARCY
    law_gamma: Law = Law.FORCHHEIMER

    @property
    def xi_bar(self) -> float:
        return 1.0 - self.xi

    @classmethod
    def uniform(
        cls,
        alpha=1.0,
        beta=0.0,
        alpha_gamma=1.0,
        beta_gamma=1.0,
        kappa=1.0,
        xi=0.75,
        p_d=0.0,
        law1=None,
        law2=None,
        law_gamma=None,
        **data,
    ) -> "ProblemData":
        """Constant coefficients on both subdomains.  A nonzero ``beta``
        selects the Forchheimer law in the matrix unless laws are given."""
        fl = Law.FORCHHEIMER if np.any(np.asarray(beta) > 0) else Law.DARCY
        fg = Law.FORCHHEIMER if np.any(np.asarray(beta_gamma) > 0) else Law.DARCY
        kw = dict(
            alpha1=_tensor(alpha),
            alpha2=_tensor(alpha),
            alpha_gamma=_scalar(alpha_gamma, lower=1e-12, strict=True),
            beta1=_scalar(beta),
            beta2=_scalar(beta),
            beta_gamma=_scalar(beta_gamma),
            kappa=_scalar(kappa, lower=1e-12, strict=True),
            xi=float(xi),
            p_d1=p_d,
            p_d2=p_d,
            p_d_gamma=(p_d, p_d) if np.ndim(p_d) == 0 else (0.0, 0.0),
            law1=Law(law1) if law1 else fl,
            law2=Law(law2) if law2 else fl,
            law_gamma=Law(law_gamma) if law_gamma else fg,
        )
        kw.update(data)
        return cls(**kw)

    def with_matrix_beta(self, beta: float) -> "ProblemData":
        """Same data with beta1 = beta2 = beta; beta = 0 selects Darcy."""
        law = Law.FORCHHEIMER if beta > 0 else Law.DARCY
        return replace(
            self, beta1=ScalarField(beta), beta2=ScalarField(beta), law1=law, law2=law
        )

    def replace(self, **changes) -> "ProblemData":
        return replace(self, **changes)

    # per-entity expansions used by assembly

    def effective_beta(self, which: str, n: int) -> np.ndarray:
        law = {"1": self.law1, "2": self.law2, "gamma": self.law_gamma}[which]
        fld = {"1": self.beta1, "2": self.beta2, "gamma": self.beta_gamma}[which]
        if law is Law.DARCY:
            return np.zeros(n)
        return fld.expand(n)

    @property
    def is_linear(self) -> bool:
        return all(
            law is Law.DARCY or np.all(np.asarray(b.values) == 0)
            for law, b in [
                (self.law1, self.beta1),
                (self.law2, self.beta2),
                (self.law_gamma, self.beta_gamma),
            ]
        )


def _size(name, value, n, errors):
    v = np.asarray(value, dtype=float)
    if v.ndim == 0:
        return
    if v.shape != (n,):
        errors.append(f"{name}: expected {n} values, got shape {v.shape}")


def validate(data: ProblemData, mesh: Mesh) -> list[Violation]:
    """Check the coefficient hypotheses of the model.

    Returns the list of bound violations; raises :class:`StructuralError` only
    when field sizes do not match the mesh.
    """
    n1 = len(mesh.triangles_of(1))
    n2 = len(mesh.triangles_of(2))
    nf = len(mesh.fracture_segments)
    nb1 = len(mesh.boundary_edges(1))
    nb2 = len(mesh.boundary_edges(2))

    errors: list[str] = []
    for name, tf, n in [("alpha1", data.alpha1, n1), ("alpha2", data.alpha2, n2)]:
        if not tf.is_constant and tf.values.shape != (n, 2, 2):
            errors.append(f"{name}: expected ({n}, 2, 2) tensors, got {tf.values.shape}")
    for name, sf, n in [
        ("alpha_gamma", data.alpha_gamma, nf),
        ("beta1", data.beta1, n1),
        ("beta2", data.beta2, n2),
        ("beta_gamma", data.beta_gamma, nf),
        ("kappa", data.kappa, nf),
    ]:
        _size(name, sf.values, n, errors)
    for name, v, n in [
        ("q1", data.q1, n1),
        ("q2", data.q2, n2),
        ("q_gamma", data.q_gamma, nf),
        ("p_d1", data.p_d1, nb1),
        ("p_d2", data.p_d2, nb2),
    ]:
        _size(name, v, n, errors)
    if np.shape(data.p_d_gamma) != (2,):
        errors.append(f"p_d_gamma: expected 2 tip values, got shape {np.shape(data.p_d_gamma)}")
    if errors:
        raise StructuralError("; ".join(errors))

    out: list[Violation] = []
    if not data.xi > 0.5:
        out.append(Violation("xi", None, "xi > 1/2", data.xi))

    for name, tf in [("alpha1", data.alpha1), ("alpha2", data.alpha2)]:
        vals = tf.values.reshape(-1, 2, 2)
        asym = np.abs(vals - vals.transpose(0, 2, 1)).max(axis=(1, 2))
        for k in np.flatnonzero(asym > 1e-14):
            out.append(Violation(name, None if tf.is_constant else int(k), "symmetry", float(asym[k])))
        eig = np.linalg.eigvalsh(0.5 * (vals + vals.transpose(0, 2, 1)))[:, 0]
        for k in np.flatnonzero(~(eig >= tf.lower) | ~(eig > 0)):
            out.append(
                Violation(
                    name,
                    None if tf.is_constant else int(k),
                    f"positive definiteness (min eigenvalue >= {tf.lower:g})",
                    float(eig[k]),
                )
            )

    def bounds(name, sf: ScalarField, positive: bool):
        v = np.atleast_1d(sf.values)
        lo = sf.lower
        bad = ~(v >= lo) | ~(v <= sf.upper)
        if positive or sf.strict:
            bad |= ~(v > 0)
        label = f"{'0 < ' if positive or sf.strict else ''}{lo:g} <= value <= {sf.upper:g}"
        for k in np.flatnonzero(bad):
            out.append(Violation(name, None if sf.is_constant else int(k), label, float(v[k])))

    bounds("alpha_gamma", data.alpha_gamma, True)
    bounds("kappa", data.kappa, True)
    bounds("beta1", data.beta1, data.law1 is Law.FORCHHEIMER)
    bounds("beta2", data.beta2, data.law2 is Law.FORCHHEIMER)
    bounds("beta_gamma", data.beta_gamma, data.law_gamma is Law.FORCHHEIMER)
    return out
