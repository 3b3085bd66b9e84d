"""Gauss-Legendre quadrature helpers.

Panels are refined by bisection until two consecutive refinement levels agree,
which is cheap for the analytic integrands used throughout the package.
"""
from __future__ import annotations

from functools import lru_cache
from typing import Callable

import numpy as np

from .errors import NonFiniteEvaluation, QuadratureNonConvergence


@lru_cache(maxsize=32)
def gauss_legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on [-1, 1] (cached; arrays are read-only)."""
    nodes, weights = np.polynomial.legendre.leggauss(order)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def panel_nodes(n_panels: int, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights for `n_panels` equal panels of [-1, 1], in ascending order."""
    base_x, base_w = gauss_legendre(order)
    width = 2.0 / n_panels
    xs = []
    ws = []
    for k in range(n_panels):
        left = -1.0 + k * width
        xs.append(left + 0.5 * width * (base_x + 1.0))
        ws.append(0.5 * width * base_w)
    return np.concatenate(xs), np.concatenate(ws)


def refine_panels(
    evaluate: Callable[[np.ndarray, np.ndarray], complex],
    tol: float = 1e-11,
    order: int = 32,
    max_levels: int = 7,
    what: str = "integral",
) -> complex:
    """Integrate ``evaluate(nodes, weights)`` over [-1, 1] with panel doubling.

    ``evaluate`` receives the full node/weight set of a refinement level and
    must return the weighted sum; it is re-invoked from scratch per level so a
    branch-tracking integrand can stay internally consistent.
    """
    previous = None
    for level in range(max_levels):
        nodes, weights = panel_nodes(2 ** level, order)
        value = evaluate(nodes, weights)
        if not np.isfinite(value):
            raise NonFiniteEvaluation(f"non-finite {what} at refinement level {level}")
        if previous is not None:
            if abs(value - previous) <= tol * max(1.0, abs(value)):
                return value
        previous = value
    raise QuadratureNonConvergence(
        f"{what} did not converge to {tol:g} within {max_levels} panel doublings"
    )
