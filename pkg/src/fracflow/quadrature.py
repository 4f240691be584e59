"""Quadrature rules on triangles (barycentric) and intervals."""

import numpy as np

# edge-midpoint rule, exact for quadratics
MIDPOINT_BARY = np.array([[0.0, 0.5, 0.5], [0.5, 0.0, 0.5], [0.5, 0.5, 0.0]])
MIDPOINT_WEIGHTS = np.full(3, 1.0 / 3.0)

# 6-point symmetric rule, exact for degree 4 (Strang & Fix / Dunavant)
_a, _b = 0.445948490915965, 0.091576213509771
_wa, _wb = 0.223381589678011, 0.109951743655322
DEG4_BARY = np.array(
    [
        [1 - 2 * _a, _a, _a],
        [_a, 1 - 2 * _a, _a],
        [_a, _a, 1 - 2 * _a],
        [1 - 2 * _b, _b, _b],
        [_b, 1 - 2 * _b, _b],
        [_b, _b, 1 - 2 * _b],
    ]
)
DEG4_WEIGHTS = np.array([_wa, _wa, _wa, _wb, _wb, _wb])


def triangle_points(vertices, triangles, bary):
    """Physical quadrature points, shape (nt, nq, 2)."""
    p = vertices[triangles]
    return np.einsum("qk,tkd->tqd", bary, p)


def gauss_interval(n):
    """Gauss-Legendre nodes and weights mapped to [0, 1]."""
    s, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (s + 1.0), 0.5 * w
