"""Periods and fibre coordinates of the curve y^2 = x^3 + a x + b.

Cycles are encoded as ordered pairs of branch points with an orientation sign;
the loop integral around a branch segment equals twice the regularized segment
integral once the square-root branch is continued along the segment.  Endpoint
square-root singularities are removed by the substitution
x(u) = midpoint + halfspan * sin(pi u / 2), which restores spectral accuracy of
the Gauss-Legendre panels for both y dx and dx/y integrands.

Branch conventions (all deterministic):
 * roots are ordered lexicographically by (Re, Im);
 * on each segment, y is anchored at the segment midpoint to the principal
   square root of (x - e1)(x - e2)(x - e3) and continued node-to-node;
 * the default basis pairs the two closest roots, adjoins the shortest second
   segment through a shared endpoint, and orients so that the period Jacobian
   has determinant -2*pi*i.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ContourCollision,
    DegenerateDiscriminant,
    QuadratureNonConvergence,
)
from .forms import ChartPoint
from .quadrature import refine_panels

TWO_PI_I = 2j * math.pi
ZT_CHART = "zt4"


@dataclass(frozen=True)
class CurvePoint:
    """Coefficients (a, b) with 4a^3 + 27b^2 != 0."""

    a: complex
    b: complex

    def __post_init__(self):
        object.__setattr__(self, "a", complex(self.a))
        object.__setattr__(self, "b", complex(self.b))
        disc = 4.0 * self.a**3 + 27.0 * self.b**2
        scale = max(1.0, abs(self.a) ** 3, abs(self.b) ** 2)
        if abs(disc) <= 1e-12 * scale:
            raise DegenerateDiscriminant(f"4a^3 + 27b^2 = {disc} vanishes")

    @property
    def discriminant(self) -> complex:
        return 4.0 * self.a**3 + 27.0 * self.b**2


@dataclass(frozen=True)
class FiberPoint:
    """A point (q, p) of the curve together with the deformation parameter r."""

    q: complex
    p: complex
    r: complex = 0.0

    def __post_init__(self):
        object.__setattr__(self, "q", complex(self.q))
        object.__setattr__(self, "p", complex(self.p))
        object.__setattr__(self, "r", complex(self.r))
        if self.p == 0:
            raise ValueError("fibre point must have p != 0")

    def check_on_curve(self, curve: CurvePoint, tol: float = 1e-9) -> None:
        lhs = self.p**2
        rhs = self.q**3 + curve.a * self.q + curve.b
        scale = max(1.0, abs(lhs), abs(rhs))
        if abs(lhs - rhs) > tol * scale:
            raise ValueError(
                f"p^2 - (q^3 + a q + b) = {lhs - rhs} exceeds tolerance {tol:g}"
            )


@dataclass(frozen=True)
class CycleBasis:
    """Two branch-segment cycles (root index pair + orientation sign)."""

    cycles: tuple[tuple[int, int, int], tuple[int, int, int]]

    def __post_init__(self):
        for i, j, s in self.cycles:
            if i == j or s not in (-1, 1):
                raise ValueError("cycle must join two distinct roots with sign +-1")


import itertools


def cubic_roots(curve: CurvePoint, reference: np.ndarray | None = None) -> np.ndarray:
    """Roots of x^3 + a x + b, Newton-polished.

    Default ordering is lexicographic by (Re, Im) with the real-part key
    quantized, so conjugate pairs (equal real parts up to roundoff) are
    ordered by their imaginary parts instead of floating-point noise.

    For finite-difference work pass ``reference`` (the base point's roots):
    the result is then ordered by nearest matching to the reference, which
    stays coherent across a stencil even when two real parts cross.
    """
    roots = np.roots([1.0, 0.0, curve.a, curve.b])
    for _ in range(2):
        value = roots**3 + curve.a * roots + curve.b
        deriv = 3.0 * roots**2 + curve.a
        roots = roots - value / deriv
    if reference is not None:
        best = None
        for perm in itertools.permutations(range(3)):
            cost = sum(abs(roots[p] - reference[i]) for i, p in enumerate(perm))
            if best is None or cost < best[0]:
                best = (cost, perm)
        return roots[list(best[1])]
    quantum = 1e-9 * max(1.0, float(np.max(np.abs(roots))))
    order = np.lexsort((roots.imag, np.round(roots.real / quantum)))
    return roots[order]


def _segment_geometry(e_from: complex, e_to: complex, nodes: np.ndarray):
    mid = 0.5 * (e_from + e_to)
    half = 0.5 * (e_to - e_from)
    s = np.sin(0.5 * math.pi * nodes)
    x = mid + half * s
    dx = half * (0.5 * math.pi) * np.cos(0.5 * math.pi * nodes)
    return x, dx


def _bump(nodes: np.ndarray, center: float, height: complex, width: float = 0.18):
    window = (1.0 - nodes**2) * np.exp(-(((nodes - center) / width) ** 2))
    dwindow = np.exp(-(((nodes - center) / width) ** 2)) * (
        -2.0 * nodes - (1.0 - nodes**2) * 2.0 * (nodes - center) / width**2
    )
    return height * window, height * dwindow


def _continued_sqrt(values: np.ndarray, anchor_index: int, anchor_value: complex) -> np.ndarray:
    """Square root of `values` continued from the anchored branch, node to node."""
    raw = np.sqrt(values.astype(complex))
    signs = np.ones(len(raw))
    if abs(raw[anchor_index] - anchor_value) > abs(raw[anchor_index] + anchor_value):
        signs[anchor_index] = -1.0
    for k in range(anchor_index + 1, len(raw)):
        prev = signs[k - 1] * raw[k - 1]
        signs[k] = 1.0 if abs(raw[k] - prev) <= abs(raw[k] + prev) else -1.0
    for k in range(anchor_index - 1, -1, -1):
        nxt = signs[k + 1] * raw[k + 1]
        signs[k] = 1.0 if abs(raw[k] - nxt) <= abs(raw[k] + nxt) else -1.0
    return signs * raw


# Anchor parameters tried for the branch reference of a segment; the first one
# whose root product stays this far (in argument) from the square-root cut
# wins, so nearby curves select the same anchor and the same sheet.
_ANCHOR_CANDIDATES = (0.0, 0.15, -0.15, 0.3, -0.3, 0.45, -0.45)
_ANCHOR_ARG_MARGIN = 0.05


def _chord_product(roots: np.ndarray, i: int, j: int, u: float) -> complex:
    mid = 0.5 * (roots[i] + roots[j])
    half = 0.5 * (roots[j] - roots[i])
    x = mid + half * math.sin(0.5 * math.pi * u)
    return complex((x - roots[0]) * (x - roots[1]) * (x - roots[2]))


def _select_anchor(roots: np.ndarray, i: int, j: int) -> tuple[float, complex]:
    """Anchor parameter and principal branch value for the (i, j) segment."""
    for u in _ANCHOR_CANDIDATES:
        prod = _chord_product(roots, i, j, u)
        if abs(prod) > 1e-12 and math.pi - abs(cmath.phase(prod)) > _ANCHOR_ARG_MARGIN:
            return u, cmath.sqrt(prod)
    return 0.0, cmath.sqrt(_chord_product(roots, i, j, 0.0))


def _aligned(candidate: complex, reference: complex) -> complex:
    return candidate if abs(candidate - reference) <= abs(candidate + reference) else -candidate


@dataclass(frozen=True)
class ContourContext:
    """Frozen root labels and branch anchors of a base point.

    Passing the base point's context into nearby evaluations keeps root
    labels (matched by distance, not re-sorted) and square-root sheets
    coherent across a finite-difference stencil, even when two roots swap
    their lexicographic order or an anchor product crosses the cut.
    """

    roots: np.ndarray
    anchors: dict


def build_context(curve: CurvePoint, basis: CycleBasis) -> ContourContext:
    roots = cubic_roots(curve)
    anchors = {}
    for i, j, _ in basis.cycles:
        u, value = _select_anchor(roots, i, j)
        anchors[(i, j)] = (u, value)
    return ContourContext(roots=roots, anchors=anchors)


def _cycle_integral(
    curve: CurvePoint,
    cycle: tuple[int, int, int],
    kind: str,
    fiber: FiberPoint | None = None,
    tol: float = 1e-11,
    contour_margin_factor: float = 1e-3,
    context: ContourContext | None = None,
) -> tuple[complex, dict]:
    """Loop integral over the cycle as 2 x the branch-segment integral.

    ``kind``: 'y dx' (periods), 'x dx/2y', 'dx/2y' (period Jacobian rows), or
    'theta' for -(p/(x-q) + r) dx / (2y).  Returns (value, info).
    """
    roots = cubic_roots(curve, reference=context.roots if context else None)
    i, j, sign = cycle
    e_from, e_to = roots[i], roots[j]
    scale = max(np.max(np.abs(roots)), 1e-6)
    info: dict = {"deformed": False}

    chord_mid = 0.5 * (e_from + e_to)
    chord_half = 0.5 * (e_to - e_from)
    if context is not None and (i, j) in context.anchors:
        u_anchor, y_base = context.anchors[(i, j)]
        anchor_ref = _aligned(cmath.sqrt(_chord_product(roots, i, j, u_anchor)), y_base)
    else:
        u_anchor, anchor_ref = _select_anchor(roots, i, j)

    deform_height = 0.0 + 0.0j
    deform_center = 0.0
    if kind == "theta":
        if fiber is None:
            raise ValueError("theta integrand needs a fibre point")
        margin = contour_margin_factor * scale
        if min(abs(fiber.q - e_from), abs(fiber.q - e_to)) < 10 * margin:
            raise ContourCollision(
                "apparent singularity too close to a contour endpoint"
            )
        # closest approach of q to the chord in chord units; deform well before
        # the pole degrades the quadrature, not only at the collision margin
        t = np.clip(((fiber.q - chord_mid) / chord_half).real, -1.0, 1.0)
        closest = chord_mid + t * chord_half
        dist = abs(fiber.q - closest)
        chord_len = abs(2.0 * chord_half)
        trigger = max(margin, 0.05 * chord_len)
        if dist < trigger:
            if abs(t) > 0.9:
                raise ContourCollision(
                    "apparent singularity too close to a contour endpoint region"
                )
            offset = fiber.q - closest
            normal = 1j * chord_half / abs(chord_half)
            side = -1.0 if (offset / normal).real > 0 else 1.0
            window = max(0.3, 1.0 - t * t)
            height = max(5.0 * margin, (0.07 * chord_len - dist) / window)
            height = min(height, 0.3 * chord_len)
            third = roots[3 - i - j]
            if abs(third - (closest + height * side * normal)) < height:
                side = -side
                if abs(third - (closest + height * side * normal)) < height:
                    raise ContourCollision(
                        "no deformation side clears both q and the third root"
                    )
            deform_height = height * side * normal
            deform_center = float(2.0 / math.pi * math.asin(t))
            info.update(
                deformed=True,
                side=side,
                height=abs(deform_height),
                center=deform_center,
            )

    path_anchor_ref = anchor_ref
    if deform_height != 0:
        # evaluate the anchor branch on the deformed path, on the same sheet
        x_u = chord_mid + chord_half * math.sin(0.5 * math.pi * u_anchor)
        bump_u, _ = _bump(np.array([u_anchor]), deform_center, deform_height)
        moved = x_u + complex(bump_u[0])
        prod = complex((moved - roots[0]) * (moved - roots[1]) * (moved - roots[2]))
        path_anchor_ref = _aligned(cmath.sqrt(prod), anchor_ref)

    def evaluate(nodes: np.ndarray, weights: np.ndarray) -> complex:
        x, dx = _segment_geometry(e_from, e_to, nodes)
        if deform_height != 0:
            bump, dbump = _bump(nodes, deform_center, deform_height)
            x = x + bump
            dx = dx + dbump
        products = (x - roots[0]) * (x - roots[1]) * (x - roots[2])
        anchor_index = int(np.argmin(np.abs(nodes - u_anchor)))
        y = _continued_sqrt(products, anchor_index, path_anchor_ref)
        if kind == "y dx":
            integrand = y
        elif kind == "x dx/2y":
            integrand = x / (2.0 * y)
        elif kind == "dx/2y":
            integrand = 1.0 / (2.0 * y)
        elif kind == "theta":
            integrand = -(fiber.p / (x - fiber.q) + fiber.r) / (2.0 * y)
        else:
            raise ValueError(f"unknown integrand kind {kind!r}")
        return complex(np.sum(weights * integrand * dx))

    value = refine_panels(evaluate, tol=tol, order=32, max_levels=8, what=f"cycle {kind}")
    return 2.0 * sign * value, info


def periods(
    curve: CurvePoint,
    basis: CycleBasis,
    tol: float = 1e-11,
    context: ContourContext | None = None,
) -> np.ndarray:
    """z_i = loop integral of y dx over the two basis cycles."""
    return np.array(
        [
            _cycle_integral(curve, cyc, "y dx", tol=tol, context=context)[0]
            for cyc in basis.cycles
        ]
    )


def period_jacobian(
    curve: CurvePoint,
    basis: CycleBasis,
    tol: float = 1e-11,
    context: ContourContext | None = None,
) -> np.ndarray:
    """Rows (dz_i/da, dz_i/db) = loop integrals of (x dx/2y, dx/2y)."""
    out = np.zeros((2, 2), dtype=complex)
    for row, cyc in enumerate(basis.cycles):
        out[row, 0] = _cycle_integral(curve, cyc, "x dx/2y", tol=tol, context=context)[0]
        out[row, 1] = _cycle_integral(curve, cyc, "dx/2y", tol=tol, context=context)[0]
    return out


def _segment_clear_of(roots: np.ndarray, i: int, j: int, others: list[int], factor: float = 0.08) -> bool:
    chord_mid = 0.5 * (roots[i] + roots[j])
    chord_half = 0.5 * (roots[j] - roots[i])
    for k in others:
        t = np.clip(((roots[k] - chord_mid) / chord_half).real, -1.0, 1.0)
        if abs(roots[k] - (chord_mid + t * chord_half)) < factor * abs(2 * chord_half):
            return False
    return True


def default_cycle_basis(curve: CurvePoint, tol: float = 1e-11) -> CycleBasis:
    """Shortest-cut basis, oriented so det(period_jacobian) = -2*pi*i."""
    roots = cubic_roots(curve)
    quantum = 1e-9 * max(1.0, float(np.max(np.abs(roots))))
    pairs = sorted(
        [(0, 1), (0, 2), (1, 2)],
        key=lambda ij: (round(abs(roots[ij[0]] - roots[ij[1]]) / quantum), ij),
    )
    candidates = []
    for i, j in pairs:
        k = 3 - i - j
        # second segment shares whichever endpoint lies closer to the third root
        for shared in sorted(
            (i, j), key=lambda m: (round(abs(roots[m] - roots[k]) / quantum), m)
        ):
            candidates.append(((i, j), (shared, k)))
    for first, second in candidates:
        if not _segment_clear_of(roots, *first, [3 - first[0] - first[1]]):
            continue
        if not _segment_clear_of(roots, *second, [first[0] + first[1] - second[0]]):
            continue
        basis = CycleBasis(((first[0], first[1], 1), (second[0], second[1], 1)))
        det = np.linalg.det(period_jacobian(curve, basis, tol=tol))
        if abs(abs(det) - 2 * math.pi) > 1e-6 * 2 * math.pi:
            raise QuadratureNonConvergence(
                f"period Jacobian determinant {det} is not +-2*pi*i"
            )
        if (det / (-TWO_PI_I)).real > 0:
            return basis
        return CycleBasis(((first[0], first[1], 1), (second[0], second[1], -1)))
    raise QuadratureNonConvergence(
        "no admissible cycle basis: branch segments are mutually obstructed"
    )


@dataclass(frozen=True)
class ThetaValues:
    """Fibre coordinates with their contour bookkeeping.

    Values are representatives; only differences along continuous paths and
    exp(theta) are free of the 2*pi*i lattice convention.
    """

    values: tuple[complex, complex]
    lattice: str = "2*pi*i"
    deformations: tuple[dict, ...] = field(default_factory=tuple)


def theta_coords(
    curve: CurvePoint,
    fiber: FiberPoint,
    basis: CycleBasis,
    tol: float = 1e-11,
    context: ContourContext | None = None,
) -> ThetaValues:
    """theta_i = -loop integral of (p/(x-q) + r) dx/(2y) over the basis cycles."""
    fiber.check_on_curve(curve)
    values = []
    deformations = []
    for cyc in basis.cycles:
        value, info = _cycle_integral(
            curve, cyc, "theta", fiber=fiber, tol=tol, context=context
        )
        values.append(value)
        deformations.append(info)
    return ThetaValues(values=(values[0], values[1]), deformations=tuple(deformations))


def zt_chart(
    curve: CurvePoint,
    fiber: FiberPoint,
    basis: CycleBasis,
    tol: float = 1e-11,
    with_jacobian: bool = False,
):
    """The point (z1, z2, theta1, theta2) of the period/fibre chart.

    With ``with_jacobian`` the period Jacobian d(z1, z2)/d(a, b) is computed
    alongside and returned as the second element.
    """
    z = periods(curve, basis, tol=tol)
    th = theta_coords(curve, fiber, basis, tol=tol)
    point = ChartPoint(ZT_CHART, (z[0], z[1], th.values[0], th.values[1]))
    if with_jacobian:
        return point, period_jacobian(curve, basis, tol=tol)
    return point


def scaled_point(curve: CurvePoint, fiber: FiberPoint, lam: float) -> tuple[CurvePoint, FiberPoint]:
    """Euler-flow scaling: weights (4/5, 6/5, 2/5, 3/5, 1/5) on (a, b, q, p, r).

    Defined for real lam > 0; periods scale by lam and thetas are invariant.
    """
    if not lam > 0:
        raise ValueError("scaling parameter must be positive")
    return (
        CurvePoint(lam ** (4.0 / 5.0) * curve.a, lam ** (6.0 / 5.0) * curve.b),
        FiberPoint(
            lam ** (2.0 / 5.0) * fiber.q,
            lam ** (3.0 / 5.0) * fiber.p,
            lam ** (1.0 / 5.0) * fiber.r,
        ),
    )


def snap_mod_2pi_i(delta: complex) -> complex:
    """Remove the nearest 2*pi*i multiple (for differences of theta values)."""
    return delta - TWO_PI_I * round(delta.imag / (2 * math.pi))
