"""Sampled monotonicity of the discrete flux operator
u -> (A_lin + A_nl(u)) u."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..assembly import assemble_linear
from ..mixed_space import MixedSpace
from ..problem_data import ProblemData


@dataclass(frozen=True)
class MonotonicityResult:
    pairs: int
    failures: int
    min_ratio: float  # min of pairing / |u - w|^2


def discrete_monotonicity(
    space: MixedSpace, data: ProblemData, pairs: int = 1000, seed: int = 0, scale: float = 1.0, slack: float = 1e-12
) -> MonotonicityResult:
    """Check  <(A(u))u - (A(w))w, u - w> > 0  for random distinct u, w.

    A pair fails when the pairing does not exceed ``slack`` times the size
    of the two operator terms.
    """
    system = assemble_linear(space, data)
    rng = np.random.default_rng(seed)
    n = space.n_flux
    failures = 0
    ratio = np.inf
    for _ in range(pairs):
        u = rng.uniform(-scale, scale, n)
        w = rng.uniform(-scale, scale, n)
        Au = system.flux_operator(u) @ u
        Aw = system.flux_operator(w) @ w
        d = u - w
        pairing = float((Au - Aw) @ d)
        size = abs(float(Au @ u)) + abs(float(Aw @ w)) + abs(float(Au @ w)) + abs(float(Aw @ u))
        if not pairing > slack * size:
            failures += 1
        ratio = min(ratio, pairing / float(d @ d))
    return MonotonicityResult(pairs, failures, float(ratio))
