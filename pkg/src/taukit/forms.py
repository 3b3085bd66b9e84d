"""Calculus of complex-valued 1-forms on coordinate charts.

Everything downstream (BPS tau functions, the Painleve I family) expresses its
log-tau differential as a :class:`OneFormField` and reuses the path
integration, closedness residual and symplectic-potential bookkeeping defined
here.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, asdict
from typing import Callable, Mapping

import numpy as np

from .errors import (
    MissingShiftDatum,
    NonFiniteEvaluation,
    QuadratureNonConvergence,
)
from .quadrature import gauss_legendre


@dataclass(frozen=True)
class ChartPoint:
    """A point of a labelled coordinate chart."""

    chart_id: str
    coords: tuple[complex, ...]

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(complex(c) for c in self.coords))

    @property
    def dim(self) -> int:
        return len(self.coords)

    def vector(self) -> np.ndarray:
        return np.asarray(self.coords, dtype=complex)

    def displaced(self, index: int, delta: complex) -> "ChartPoint":
        coords = list(self.coords)
        coords[index] += delta
        return ChartPoint(self.chart_id, tuple(coords))


@dataclass(frozen=True)
class OneFormField:
    """A 1-form given by a coefficient evaluator on one chart.

    ``evaluator`` maps a ChartPoint to the coefficient vector (one complex
    coefficient per coordinate).  ``expected_closed`` is advisory metadata used
    by reports.
    """

    chart_id: str
    dim: int
    evaluator: Callable[[ChartPoint], np.ndarray]
    expected_closed: bool = True

    def coefficients(self, point: ChartPoint) -> np.ndarray:
        if point.chart_id != self.chart_id:
            raise ValueError(
                f"form on chart {self.chart_id!r} evaluated at a point of {point.chart_id!r}"
            )
        values = np.asarray(self.evaluator(point), dtype=complex)
        if values.shape != (self.dim,):
            raise ValueError(
                f"evaluator returned shape {values.shape}, expected ({self.dim},)"
            )
        if not np.all(np.isfinite(values)):
            raise NonFiniteEvaluation(
                f"form coefficients non-finite at {point.coords}"
            )
        return values


@dataclass(frozen=True)
class Polyline:
    """An ordered chain of at least two points in a single chart."""

    points: tuple[ChartPoint, ...]

    def __post_init__(self):
        pts = tuple(self.points)
        if len(pts) < 2:
            raise ValueError("a polyline needs at least two points")
        chart = pts[0].chart_id
        for prev, cur in zip(pts, pts[1:]):
            if cur.chart_id != chart:
                raise ValueError("polyline points lie in different charts")
            if np.allclose(prev.vector(), cur.vector(), rtol=0.0, atol=0.0):
                raise ValueError("consecutive polyline points coincide")
        object.__setattr__(self, "points", pts)

    @property
    def chart_id(self) -> str:
        return self.points[0].chart_id

    @property
    def start(self) -> ChartPoint:
        return self.points[0]

    @property
    def end(self) -> ChartPoint:
        return self.points[-1]

    def reversed(self) -> "Polyline":
        return Polyline(tuple(reversed(self.points)))

    def joined(self, other: "Polyline") -> "Polyline":
        if other.points[0] != self.points[-1]:
            raise ValueError("polylines do not share an endpoint")
        return Polyline(self.points + other.points[1:])


def polyline(chart_id: str, vertices) -> Polyline:
    """Convenience constructor from raw coordinate tuples."""
    return Polyline(tuple(ChartPoint(chart_id, tuple(v)) for v in vertices))


def _segment_quadrature(form: OneFormField, a: ChartPoint, b: ChartPoint, order: int) -> complex:
    nodes, weights = gauss_legendre(order)
    va, vb = a.vector(), b.vector()
    tangent = 0.5 * (vb - va)
    total = 0.0 + 0.0j
    for t, w in zip(nodes, weights):
        pos = 0.5 * (va + vb) + t * tangent
        coeffs = form.coefficients(ChartPoint(a.chart_id, tuple(pos)))
        total += w * np.dot(coeffs, tangent)
    return total


def _integrate_segment(
    form: OneFormField,
    a: ChartPoint,
    b: ChartPoint,
    order: int,
    tol: float,
    depth: int,
) -> complex:
    whole = _segment_quadrature(form, a, b, order)
    mid = ChartPoint(a.chart_id, tuple(0.5 * (a.vector() + b.vector())))
    halves = _segment_quadrature(form, a, mid, order) + _segment_quadrature(form, mid, b, order)
    if abs(whole - halves) <= tol * max(1.0, abs(halves)):
        return halves
    if depth <= 0:
        raise QuadratureNonConvergence(
            f"segment integral not converged to {tol:g} (residual {abs(whole - halves):.3e})"
        )
    return _integrate_segment(form, a, mid, order, 0.5 * tol, depth - 1) + _integrate_segment(
        form, mid, b, order, 0.5 * tol, depth - 1
    )


def integrate_one_form(
    form: OneFormField,
    path: Polyline,
    nodes_per_segment: int = 16,
    tol: float = 1e-10,
    max_depth: int = 10,
) -> complex:
    """Line integral of ``form`` along ``path``.

    Gauss-Legendre of fixed order per segment, with bisection refinement until
    two levels agree within ``tol``.  Linear in the form; additive under path
    concatenation; antisymmetric under reversal.
    """
    if path.chart_id != form.chart_id:
        raise ValueError("form and path live on different charts")
    total = 0.0 + 0.0j
    for a, b in zip(path.points, path.points[1:]):
        total += _integrate_segment(form, a, b, nodes_per_segment, tol, max_depth)
    return total


def d_residual(form: OneFormField, point: ChartPoint, step: float = 1e-5) -> np.ndarray:
    """Antisymmetric matrix of exterior-derivative coefficients at ``point``.

    Entry (i, j) approximates d(form)_{ij} = d_i(form_j) - d_j(form_i) by
    central differences of size ``step * (1 + |coord|)`` per coordinate.  For a
    closed form the matrix tends to zero as O(step^2).
    """
    n = point.dim
    partials = np.zeros((n, n), dtype=complex)  # partials[i, j] = d_i form_j
    for i in range(n):
        h = step * (1.0 + abs(point.coords[i]))
        plus = form.coefficients(point.displaced(i, h))
        minus = form.coefficients(point.displaced(i, -h))
        partials[i, :] = (plus - minus) / (2.0 * h)
    return partials - partials.T


THETA0_CHOICES = ("canonical", "liouville", "hamiltonian")
THETA1_CHOICES = ("full", "polarized")
THETAI_CHOICES = ("standard", "flipped")

# Multiples of the named shift scalar added to log(tau) relative to the
# reference gauge used by the closed-form tau differentials downstream
# (hamiltonian / polarized / standard).
_THETA0_OFFSET = {"canonical": 0, "hamiltonian": 1, "liouville": -1}
_THETA1_OFFSET = {"full": 0, "polarized": 1}
_THETAI_OFFSET = {"standard": 0, "flipped": 1}

SHIFT_DATA_KEYS = ("ie_lambda_half", "polarization_half", "flip_term")


@dataclass(frozen=True)
class PotentialChoice:
    """Selection of symplectic potentials entering the tau definition."""

    theta0: str = "hamiltonian"
    theta1: str = "polarized"
    thetaI: str = "standard"

    def __post_init__(self):
        if self.theta0 not in THETA0_CHOICES:
            raise ValueError(f"theta0 must be one of {THETA0_CHOICES}")
        if self.theta1 not in THETA1_CHOICES:
            raise ValueError(f"theta1 must be one of {THETA1_CHOICES}")
        if self.thetaI not in THETAI_CHOICES:
            raise ValueError(f"thetaI must be one of {THETAI_CHOICES}")


def shift_by_potential_change(
    log_tau: complex,
    choice_from: PotentialChoice,
    choice_to: PotentialChoice,
    shift_data: Mapping[str, complex],
) -> complex:
    """Translate log(tau) between two potential choices.

    ``shift_data`` supplies the evaluated scalars at the point in question:
    ``ie_lambda_half``     (1/2) * (Euler contraction of the Liouville form),
    ``polarization_half``  (1/2) * sum_i omega_{i,i+d} x_i x_{i+d},
    ``flip_term``          K = sum_{p,q} omega_{pq} z_p theta_q.

    Equal choices are the identity; compositions from->mid->to agree exactly
    with from->to.
    """
    result = complex(log_tau)
    steps = (
        ("ie_lambda_half", _THETA0_OFFSET[choice_to.theta0] - _THETA0_OFFSET[choice_from.theta0]),
        ("polarization_half", _THETA1_OFFSET[choice_to.theta1] - _THETA1_OFFSET[choice_from.theta1]),
        ("flip_term", _THETAI_OFFSET[choice_to.thetaI] - _THETAI_OFFSET[choice_from.thetaI]),
    )
    for key, multiple in steps:
        if multiple == 0:
            continue
        if key not in shift_data:
            raise MissingShiftDatum(f"shift datum {key!r} required for this change")
        result += multiple * complex(shift_data[key])
    return result


@dataclass
class TauReport:
    """Accumulated log(tau) along a path plus the residuals checked en route.

    log(tau) is normalized to 0 at the path start; that base point is an
    artifact convention and is recorded here.
    """

    log_tau: complex
    chart_id: str
    start: tuple[complex, ...]
    end: tuple[complex, ...]
    epsilon: complex
    potential_choice: PotentialChoice
    normalization: str = "log(tau) = 0 at path start"
    shift_applied: complex = 0j
    closedness_samples: tuple[float, ...] = ()
    identity_residuals: dict = field(default_factory=dict)
    notes: tuple[str, ...] = ()

    def to_json(self) -> str:
        def enc(value):
            if isinstance(value, complex):
                return [value.real, value.imag]
            if isinstance(value, tuple):
                return [enc(v) for v in value]
            if isinstance(value, dict):
                return {k: enc(v) for k, v in value.items()}
            if isinstance(value, PotentialChoice):
                return asdict(value)
            return value

        payload = {k: enc(v) for k, v in asdict(self).items()}
        payload["potential_choice"] = asdict(self.potential_choice)
        return json.dumps(payload, sort_keys=True)
