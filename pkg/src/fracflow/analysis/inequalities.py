"""Sampling check of the elementary vector inequalities behind the
monotonicity of the Forchheimer operator."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SLACK = 1e-12


def _norm(x):
    return np.linalg.norm(x, axis=-1)


def _root_scaled(x):
    """|x|^{-1/2} x, continued by 0 at the origin."""
    n = _norm(x)
    safe = np.where(n > 0, n, 1.0)
    return np.where(n[..., None] > 0, x / np.sqrt(safe)[..., None], 0.0)


def ineq_growth(x, y):
    """| |x|x - |y|y |  <=  (|x| + |y|) |x - y|"""
    lhs = _norm(_norm(x)[..., None] * x - _norm(y)[..., None] * y)
    rhs = (_norm(x) + _norm(y)) * _norm(x - y)
    return lhs, rhs


def ineq_monotone(x, y):
    """(1/2) |x - y|^3  <=  (|x|x - |y|y) . (x - y)"""
    lhs = 0.5 * _norm(x - y) ** 3
    rhs = ((_norm(x)[..., None] * x - _norm(y)[..., None] * y) * (x - y)).sum(-1)
    return lhs, rhs


def ineq_root_holder(x, y):
    """| |x|^{-1/2}x - |y|^{-1/2}y |  <=  sqrt(2) |x - y|^{1/2}"""
    lhs = _norm(_root_scaled(x) - _root_scaled(y))
    rhs = np.sqrt(2.0) * np.sqrt(_norm(x - y))
    return lhs, rhs


def ineq_root_monotone(x, y):
    """|x - y|^2 / (sqrt|x| + sqrt|y|)  <=  (|x|^{-1/2}x - |y|^{-1/2}y) . (x - y)"""
    d = np.sqrt(_norm(x)) + np.sqrt(_norm(y))
    num = _norm(x - y) ** 2
    lhs = np.where(d > 0, num / np.where(d > 0, d, 1.0), 0.0)
    rhs = ((_root_scaled(x) - _root_scaled(y)) * (x - y)).sum(-1)
    return lhs, rhs


INEQUALITIES = {
    "growth": ineq_growth,
    "monotone": ineq_monotone,
    "root_holder": ineq_root_holder,
    "root_monotone": ineq_root_monotone,
}


def violations(lhs, rhs, slack: float = SLACK) -> np.ndarray:
    """Mask of samples with lhs > rhs beyond an absolute-plus-relative slack."""
    return lhs - rhs > slack * (1.0 + np.maximum(np.abs(lhs), np.abs(rhs)))


def edge_cases(dim: int, rng: np.random.Generator, n: int = 64):
    """Pairs with x = 0, y = 0, x = y, both zero, and colinear pairs."""
    z = np.zeros((n, dim))
    r = rng.uniform(-10, 10, (n, dim))
    s = rng.uniform(-10, 10, (n, dim))
    t = rng.uniform(-3, 3, (n, 1))
    e1 = np.zeros((1, dim))
    e1[0, 0] = 1.0
    xs = [r, z, r, z[:1], r, r, e1]
    ys = [z, s, r.copy(), z[:1], t * r, -r, np.zeros((1, dim))]
    return np.concatenate(xs), np.concatenate(ys)


@dataclass(frozen=True)
class InequalityRow:
    name: str
    dims: str
    samples: int
    violations: int
    max_excess: float

    SCHEMA = ("inequality", "dims", "samples", "violations", "max_excess")

    def to_row(self) -> dict:
        return dict(
            inequality=self.name,
            dims=self.dims,
            samples=self.samples,
            violations=self.violations,
            max_excess=self.max_excess,
        )


def check_vector_inequalities(samples: int = 100_000, dims=(1, 2, 3), seed: int = 0) -> list[InequalityRow]:
    """Evaluate every inequality on ``samples`` uniform random pairs per
    dimension plus edge cases; one row per inequality."""
    dims = list(dims)
    if not dims or any(d not in (1, 2, 3) for d in dims):
        raise ValueError("dims must be a nonempty subset of {1, 2, 3}")
    rng = np.random.default_rng(seed)
    pairs = []
    for d in dims:
        x = rng.uniform(-10, 10, (samples, d))
        y = rng.uniform(-10, 10, (samples, d))
        ex, ey = edge_cases(d, rng)
        pairs.append((np.concatenate([x, ex]), np.concatenate([y, ey])))
    rows = []
    for name, fn in INEQUALITIES.items():
        count, total, excess = 0, 0, -np.inf
        for x, y in pairs:
            lhs, rhs = fn(x, y)
            count += int(violations(lhs, rhs).sum())
            total += len(lhs)
            excess = max(excess, float((lhs - rhs).max()))
        rows.append(InequalityRow(name, " ".join(map(str, dims)), total, count, excess))
    return rows
