"""The isomonodromic family over the cubic curve and its tau function.

Phase space: (a, b, q, p, r) with 4a^3 + 27b^2 != 0, p^2 = q^3 + a q + b and
p != 0, plus the pencil parameter eps.  The two isomonodromy vector fields (in
the chart (a, b, q, r), with p carried as a dependent quantity) span a flat
pencil; their r = 0 locus Y carries coordinates (a, q, p) and a Hamiltonian
leaf flow

    dq/da = -2p/eps,  dp/da = -(3q^2 + a)/eps,  db/da = -q,

which under t = 2a, H = 2b, q_LR = q, p_LR = -2p, eps = 1/2 is the Painleve I
flow q_tt = 6 q^2 + t with sigma function sigma(t) = H(t).

The tau differential restricted to Y combines an algebraic part (expanded in
(a, q, p) using b = p^2 - q^3 - a q) with the monodromy term
(1/2 pi i) x1 dx2 built from the oscillator's coordinates; contracted with the
leaf tangent the algebraic part collapses to eps^-2 b and the monodromy term
vanishes by isomonodromy.
"""
from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass
from importlib import resources

import numpy as np

from . import elliptic, oscillator
from .forms import ChartPoint, OneFormField, PotentialChoice, TauReport
from .errors import MovablePoleEncountered, StepUnderflow, ZeroP

TWO_PI_I = 2j * math.pi
LEAF_CHART = "pi1-aqp"


@dataclass(frozen=True)
class ExtendedPoint:
    """A point of the extended family; validates the curve and fibre relations."""

    a: complex
    b: complex
    q: complex
    p: complex
    r: complex
    epsilon: complex

    def __post_init__(self):
        for name in ("a", "b", "q", "p", "r", "epsilon"):
            object.__setattr__(self, name, complex(getattr(self, name)))
        if self.epsilon == 0:
            raise ValueError("epsilon must be nonzero")
        if self.p == 0:
            raise ZeroP("extended point requires p != 0")
        disc = 4.0 * self.a**3 + 27.0 * self.b**2
        if abs(disc) <= 1e-12 * max(1.0, abs(self.a) ** 3, abs(self.b) ** 2):
            raise ValueError("discriminant 4a^3 + 27b^2 vanishes")
        lhs, rhs = self.p**2, self.q**3 + self.a * self.q + self.b
        if abs(lhs - rhs) > 1e-9 * max(1.0, abs(lhs), abs(rhs)):
            raise ValueError("extended point requires p^2 = q^3 + a q + b")

    def curve(self) -> elliptic.CurvePoint:
        return elliptic.CurvePoint(self.a, self.b)

    def fiber(self) -> elliptic.FiberPoint:
        return elliptic.FiberPoint(self.q, self.p, self.r)

    def potential(self) -> oscillator.OscillatorPotential:
        return oscillator.OscillatorPotential(
            self.a, self.b, self.q, self.p, self.r, self.epsilon
        )

    def on_leaf_locus(self) -> bool:
        return self.r == 0


def reference_point(epsilon: complex = 0.5) -> ExtendedPoint:
    """The shipped balanced-period fixture point on Y (r = 0).

    Chosen so every period combination has a small real part, which keeps the
    monodromy coordinates well-conditioned down to eps = 0.05; the frozen
    coordinate labeling of oscillator.fg_coordinates was calibrated here.
    """
    raw = json.loads(
        resources.files("taukit.fixtures").joinpath("pi1_point.json").read_text()
    )
    def cx(name):
        re, im = raw[name]
        return complex(re, im)

    return ExtendedPoint(cx("a"), cx("b"), cx("q"), cx("p"), cx("r"), epsilon)


def continued_p(a: complex, b: complex, q: complex, p_reference: complex) -> complex:
    """Square root of q^3 + a q + b on the sheet closest to ``p_reference``."""
    value = cmath.sqrt(q**3 + a * q + b)
    if abs(value - p_reference) > abs(value + p_reference):
        value = -value
    if value == 0:
        raise ZeroP("p vanished during constrained continuation")
    return value


def isomonodromy_fields(pt: ExtendedPoint, r_coeff_perturbation: complex = 0.0):
    """The two pencil vector fields at ``pt`` in the chart (a, b, q, r).

    ``r_coeff_perturbation`` adds a constant to the d/dr coefficient of the
    first field (negative-control testing of flatness).
    """
    a, q, p, r, eps = pt.a, pt.q, pt.p, pt.r, pt.epsilon
    if p == 0:
        raise ZeroP("vector fields need p != 0")
    va = np.array(
        [
            1.0,
            0.0,
            -2.0 * p / eps - r / p,
            -q / eps - (r**2 * (3.0 * q**2 + a) - q * p * r) / (2.0 * p**3)
            + r_coeff_perturbation,
        ],
        dtype=complex,
    )
    vb = np.array([0.0, 1.0, 0.0, -1.0 / eps + r / (2.0 * p**2)], dtype=complex)
    return va, vb


def _displaced_point(pt: ExtendedPoint, index: int, delta: complex) -> ExtendedPoint:
    coords = [pt.a, pt.b, pt.q, pt.r]
    coords[index] += delta
    a, b, q, r = coords
    return ExtendedPoint(a, b, q, continued_p(a, b, q, pt.p), r, pt.epsilon)


def flatness_residual(
    pt: ExtendedPoint, step: float = 1e-5, r_coeff_perturbation: complex = 0.0
) -> np.ndarray:
    """Lie bracket of the two pencil fields via central-difference Jacobians.

    Zero (to O(step^2)) exactly when the pencil is flat; p is continued
    through its constraint at every displaced evaluation.
    """
    def fields(point):
        return isomonodromy_fields(point, r_coeff_perturbation)

    va, vb = fields(pt)
    jac_a = np.zeros((4, 4), dtype=complex)  # jac[k, j] = d (va_k) / d x_j
    jac_b = np.zeros((4, 4), dtype=complex)
    base = [pt.a, pt.b, pt.q, pt.r]
    for j in range(4):
        h = step * (1.0 + abs(base[j]))
        ap, bp = fields(_displaced_point(pt, j, h))
        am, bm = fields(_displaced_point(pt, j, -h))
        jac_a[:, j] = (ap - am) / (2.0 * h)
        jac_b[:, j] = (bp - bm) / (2.0 * h)
    return jac_b @ va - jac_a @ vb


def field_scale(pt: ExtendedPoint) -> float:
    va, vb = isomonodromy_fields(pt)
    return max(1.0, float(np.max(np.abs(va))), float(np.max(np.abs(vb))))


def omega_identity_residual(
    pt: ExtendedPoint,
    step: float = 1e-3,
    basis: elliptic.CycleBasis | None = None,
    tol: float = 3e-12,
) -> np.ndarray:
    """Difference of the two expressions for the middle symplectic form.

    (1/2 pi i)(d theta1 ^ d z2 - d theta2 ^ d z1) minus (dq ^ dp + da ^ dr),
    both written as antisymmetric matrices over the chart (a, b, q, r) with
    dp expanded through the fibre constraint.  Vanishes on the family.

    The theta partials use fourth-order stencils: near-contour sample points
    can have large higher derivatives, and the wider accurate stencil keeps
    the residual well under the shipped tolerance without driving the
    quadrature noise up.
    """
    curve = pt.curve()
    if basis is None:
        basis = elliptic.default_cycle_basis(curve, tol=tol)
    contour = elliptic.build_context(curve, basis)
    jac = elliptic.period_jacobian(curve, basis, tol=tol, context=contour)
    z_partials = np.zeros((2, 4), dtype=complex)
    z_partials[:, 0] = jac[:, 0]
    z_partials[:, 1] = jac[:, 1]

    center = elliptic.theta_coords(curve, pt.fiber(), basis, tol=tol, context=contour).values
    theta_partials = np.zeros((2, 4), dtype=complex)
    base = [pt.a, pt.b, pt.q, pt.r]
    for j in range(4):
        h = step * (1.0 + abs(base[j]))
        samples = []
        for m in (-2, -1, 1, 2):
            moved = _displaced_point(pt, j, m * h)
            th = elliptic.theta_coords(
                moved.curve(), moved.fiber(), basis, tol=tol, context=contour
            ).values
            samples.append(
                tuple(c + elliptic.snap_mod_2pi_i(v - c) for v, c in zip(th, center))
            )
        for i in range(2):
            theta_partials[i, j] = (
                samples[0][i] - 8.0 * samples[1][i] + 8.0 * samples[2][i] - samples[3][i]
            ) / (12.0 * h)

    def asym(u, v):
        m = np.outer(u, v)
        return m - m.T

    lhs = (
        asym(theta_partials[0], z_partials[1])
        - asym(theta_partials[1], z_partials[0])
    ) / TWO_PI_I

    rhs = np.zeros((4, 4), dtype=complex)
    rhs[0, 2] = -pt.q / (2.0 * pt.p)   # dq ^ dp -> (q/2p) dq ^ da
    rhs[1, 2] = -1.0 / (2.0 * pt.p)    # dq ^ dp -> (1/2p) dq ^ db
    rhs[0, 3] = 1.0                    # da ^ dr
    rhs = rhs - rhs.T
    return lhs - rhs


# --------------------------------------------------------------------------
# leaf flow on Y = {r = 0}
# --------------------------------------------------------------------------


@dataclass
class LeafTrajectory:
    """Samples of the Hamiltonian leaf flow at the requested a-grid."""

    a: np.ndarray
    q: np.ndarray
    p: np.ndarray
    b_ode: np.ndarray      # b integrated through db/da = -q
    log_tau: np.ndarray    # eps^-2 int b da, normalized to 0 at the start
    epsilon: complex

    @property
    def b(self) -> np.ndarray:
        """Algebraic b = p^2 - q^3 - a q (the fibre constraint)."""
        return self.p**2 - self.q**3 - self.a * self.q

    def constraint_drift(self) -> float:
        return float(np.max(np.abs(self.b_ode - self.b)))

    def point(self, index: int) -> ExtendedPoint:
        return ExtendedPoint(
            self.a[index], self.b[index], self.q[index], self.p[index], 0.0, self.epsilon
        )

    def to_json(self) -> str:
        def arr(values):
            return [[v.real, v.imag] for v in values]

        return json.dumps(
            {
                "epsilon": [self.epsilon.real, self.epsilon.imag],
                "a": arr(self.a),
                "q": arr(self.q),
                "p": arr(self.p),
                "b_ode": arr(self.b_ode),
                "log_tau": arr(self.log_tau),
            },
            sort_keys=True,
        )


def leaf_tangent(a: complex, q: complex, p: complex, epsilon: complex) -> np.ndarray:
    """Leaf direction in the (a, q, p) chart (da = 1 normalization)."""
    return np.array([1.0, -2.0 * p / epsilon, -(3.0 * q**2 + a) / epsilon])


_RK_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_RK_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_RK_B5 = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_RK_B4 = (5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40)


def _advance(rhs, y, a0, a1, rtol, pole_guard):
    span = a1 - a0
    s, h = 0.0, 0.1
    while s < 1.0:
        h = min(h, 1.0 - s)
        k = []
        for i in range(7):
            yi = y
            for j, coef in enumerate(_RK_A[i]):
                if coef:
                    yi = yi + (h * span * coef) * k[j]
            k.append(rhs(a0 + (s + _RK_C[i] * h) * span, yi))
        y5 = y + (h * span) * sum(b * kk for b, kk in zip(_RK_B5, k))
        y4 = y + (h * span) * sum(b * kk for b, kk in zip(_RK_B4, k))
        scale = np.maximum(np.abs(y), np.abs(y5)) + 1.0
        err = float(np.max(np.abs(y5 - y4) / scale))
        if err <= rtol:
            s += h
            y = y5
            if abs(y[0]) + abs(y[1]) > pole_guard:
                raise MovablePoleEncountered(
                    f"flow blew up near a = {a0 + s * span}", location=a0 + s * span
                )
        h *= min(5.0, max(0.2, 0.9 * (rtol / max(err, 1e-300)) ** 0.2))
        if h < 1e-12:
            raise StepUnderflow("leaf flow step underflow")
    return y


def hamiltonian_leaf_flow(
    start: tuple[complex, complex, complex],
    epsilon: complex,
    a_grid,
    rtol: float = 1e-12,
    pole_guard: float = 1e6,
) -> LeafTrajectory:
    """Integrate the leaf flow from (a0, q0, p0) across ``a_grid``.

    State (q, p, b, log tau) with b integrated independently (db/da = -q) as a
    cross-check of the algebraic reconstruction; log tau accumulates
    eps^-2 b da with the algebraic b.  Movable poles raise with a location
    estimate instead of being traversed.
    """
    a_values = [complex(v) for v in a_grid]
    a0, q0, p0 = complex(start[0]), complex(start[1]), complex(start[2])
    if p0 == 0:
        raise ZeroP("leaf start requires p != 0")
    if abs(a_values[0] - a0) > 1e-12 * (1 + abs(a0)):
        raise ValueError("a_grid must start at a0")
    b0 = p0**2 - q0**3 - a0 * q0
    inv_eps2 = 1.0 / epsilon**2

    def rhs(a, y):
        q, p, _, _ = y
        b_alg = p * p - q**3 - a * q
        return np.array(
            [-2.0 * p / epsilon, -(3.0 * q**2 + a) / epsilon, -q, inv_eps2 * b_alg]
        )

    state = np.array([q0, p0, b0, 0.0], dtype=complex)
    rows = [state.copy()]
    for a_prev, a_next in zip(a_values, a_values[1:]):
        state = _advance(rhs, state, a_prev, a_next, rtol, pole_guard)
        rows.append(state.copy())
    data = np.array(rows)
    return LeafTrajectory(
        a=np.array(a_values),
        q=data[:, 0],
        p=data[:, 1],
        b_ode=data[:, 2],
        log_tau=data[:, 3],
        epsilon=complex(epsilon),
    )


def uniform_grid(a0: float, a1: float, samples: int) -> np.ndarray:
    return np.linspace(a0, a1, samples)


# --------------------------------------------------------------------------
# tau differential on Y
# --------------------------------------------------------------------------


def algebraic_coefficients(a: complex, q: complex, p: complex, epsilon: complex) -> np.ndarray:
    """Non-monodromy part of the tau differential in the (a, q, p) chart.

    The (a, b) pair of terms is expanded through b = p^2 - q^3 - a q and
    db = -q da - (3q^2 + a) dq + 2p dp.
    """
    b = p * p - q**3 - a * q
    inv2 = 1.0 / epsilon**2
    inv1 = 1.0 / epsilon
    c_a = inv2 * (-b / 5.0 - 4.0 * a * q / 5.0)
    c_q = -inv2 * (4.0 * a / 5.0) * (3.0 * q**2 + a) - inv1 * 3.0 * p / 5.0
    c_p = inv2 * 8.0 * a * p / 5.0 + inv1 * 2.0 * q / 5.0
    return np.array([c_a, c_q, c_p])


def lr_coefficients(a: complex, q: complex, p: complex) -> np.ndarray:
    """The Painleve I tau 1-form of Lisovyy & Roussillon (2017), non-monodromy
    part, mapped through t = 2a, H = 2b, p_LR = -2p and expanded in (a, q, p)."""
    b = p * p - q**3 - a * q
    c_a = -4.0 * b / 5.0 + (16.0 * a / 5.0) * (-q)
    c_q = (16.0 * a / 5.0) * (-(3.0 * q**2 + a)) - 6.0 * p / 5.0
    c_p = (16.0 * a / 5.0) * (2.0 * p) + 4.0 * q / 5.0
    return np.array([c_a, c_q, c_p])


def lr_residual(a: complex, q: complex, p: complex) -> float:
    """Max coefficient difference between the family form at eps = 1/2 and the
    Lisovyy-Roussillon form (algebraic identity; machine zero)."""
    mine = algebraic_coefficients(a, q, p, 0.5)
    return float(np.max(np.abs(mine - lr_coefficients(a, q, p))))


class _FgCache:
    """Branch-coherent cache of coordinate evaluations over Y."""

    def __init__(self, epsilon, rtol, fg_kwargs):
        self.epsilon = complex(epsilon)
        self.rtol = rtol
        self.fg_kwargs = dict(fg_kwargs)
        self.values: dict[tuple, tuple[complex, complex]] = {}
        self.reference: tuple[complex, complex] | None = None

    def key(self, a, q, p):
        return (round(a.real, 12), round(a.imag, 12), round(q.real, 12),
                round(q.imag, 12), round(p.real, 12), round(p.imag, 12))

    def fg(self, a, q, p):
        key = self.key(complex(a), complex(q), complex(p))
        if key not in self.values:
            b = p * p - q**3 - a * q
            pot = oscillator.OscillatorPotential(a, b, q, p, 0.0, self.epsilon)
            value = oscillator.fg_coordinates(
                pot, rtol=self.rtol, prev=self.reference, **self.fg_kwargs
            )
            if self.reference is None:
                self.reference = value
            self.values[key] = value
        return self.values[key]


def assemble_tau_oneform(
    epsilon: complex,
    fg_step: float = 0.02,
    rtol: float = 1e-11,
    **fg_kwargs,
) -> OneFormField:
    """The tau differential on Y as a OneFormField over the chart (a, q, p).

    Coefficients: algebraic part plus (1/2 pi i) x1 grad(x2), the gradient by
    fourth-order central differences of the monodromy coordinates (step
    ``fg_step`` scaled per coordinate).  Evaluations are cached and kept on a
    single log branch via continuation from the first evaluation.
    """
    cache = _FgCache(epsilon, rtol, fg_kwargs)

    def evaluator(point: ChartPoint) -> np.ndarray:
        a, q, p = point.coords
        coeffs = algebraic_coefficients(a, q, p, epsilon)
        x1, _ = cache.fg(a, q, p)
        base = [a, q, p]
        for j in range(3):
            h = fg_step * (1.0 + abs(base[j]))
            samples = []
            for m in (-2, -1, 1, 2):
                coords = list(base)
                coords[j] += m * h
                samples.append(cache.fg(*coords)[1])
            grad = (samples[0] - 8.0 * samples[1] + 8.0 * samples[2] - samples[3]) / (12.0 * h)
            coeffs[j] += x1 * grad / TWO_PI_I
        return coeffs

    return OneFormField(LEAF_CHART, 3, evaluator, expected_closed=True)


def leaf_direction_residual(
    pt: ExtendedPoint,
    flow_step: float = 0.05,
    rtol: float = 1e-11,
    **fg_kwargs,
) -> float:
    """|<tau differential, leaf tangent> - eps^-2 b| at a point of Y.

    The monodromy term is differentiated along the flow itself (two short
    leaf integrations), where the coordinates are constant by isomonodromy,
    so the residual isolates genuine assembly errors.
    """
    if pt.r != 0:
        raise ValueError("leaf contraction is defined on the r = 0 locus")
    a, q, p, eps = pt.a, pt.q, pt.p, pt.epsilon
    tangent = leaf_tangent(a, q, p, eps)
    algebraic = complex(np.dot(algebraic_coefficients(a, q, p, eps), tangent))

    pot = pt.potential()
    center = oscillator.fg_coordinates(pot, rtol=rtol, **fg_kwargs)
    flowed = {}
    for sign in (1, -1):
        grid = [a, a + sign * flow_step]
        traj = hamiltonian_leaf_flow((a, q, p), eps, grid)
        end = traj.point(-1)
        flowed[sign] = oscillator.fg_coordinates(
            end.potential(), rtol=rtol, prev=center, **fg_kwargs
        )
    dx2 = (flowed[1][1] - flowed[-1][1]) / (2.0 * flow_step)
    monodromy = center[0] * dx2 / TWO_PI_I
    b = p * p - q**3 - a * q
    return abs(algebraic + monodromy - b / eps**2)


def integrate_assembled(
    form: OneFormField,
    start: tuple[complex, complex, complex],
    end: tuple[complex, complex, complex],
    nodes: int = 12,
) -> complex:
    """Integrate the assembled tau differential along the straight chord in
    (a, q, p) with a single fixed-order Gauss rule.

    The form is closed on Y, so the value is path-independent within a simply
    connected regular patch; the integrand is analytic along an admissible
    chord and a moderate spectral rule reaches ~1e-8 while every node costs a
    full stencil of monodromy-coordinate evaluations.
    """
    from .quadrature import gauss_legendre

    xs, ws = gauss_legendre(nodes)
    va = np.asarray(start, dtype=complex)
    vb = np.asarray(end, dtype=complex)
    tangent = 0.5 * (vb - va)
    total = 0.0 + 0.0j
    for t, w in zip(xs, ws):
        pos = 0.5 * (va + vb) + t * tangent
        coeffs = form.coefficients(ChartPoint(LEAF_CHART, tuple(pos)))
        total += w * complex(np.dot(coeffs, tangent))
    return total


def leaf_tau(
    traj: LeafTrajectory,
    oneform_check: bool = False,
    check_nodes: int = 10,
    rtol: float = 1e-10,
    fg_step: float = 0.015,
) -> TauReport:
    """log tau along a leaf with its cross-checks.

    log tau(a) = eps^-2 int b da from the trajectory start.  Residuals:
    the fibre-constraint drift, the Painleve I sigma-form residual of
    sigma = 2b(t = 2a) (finite differences on the uniform grid), and, when
    ``oneform_check`` is set, the mismatch against the assembled tau
    differential integrated along a straight chord between the endpoints.
    """
    residuals = {"constraint_drift": traj.constraint_drift()}
    sigma = sigma_form_residuals(traj)
    if sigma.size:
        residuals["sigma_form"] = float(np.max(np.abs(sigma)))
    notes = []
    if oneform_check:
        form = assemble_tau_oneform(traj.epsilon, fg_step=fg_step, rtol=rtol)
        chord = integrate_assembled(
            form,
            (traj.a[0], traj.q[0], traj.p[0]),
            (traj.a[-1], traj.q[-1], traj.p[-1]),
            nodes=check_nodes,
        )
        residuals["oneform_vs_leaf"] = float(abs(chord - traj.log_tau[-1]))
        notes.append("oneform check integrates the assembled differential along the chord")
    return TauReport(
        log_tau=complex(traj.log_tau[-1]),
        chart_id=LEAF_CHART,
        start=(traj.a[0], traj.q[0], traj.p[0]),
        end=(traj.a[-1], traj.q[-1], traj.p[-1]),
        epsilon=traj.epsilon,
        potential_choice=PotentialChoice("hamiltonian", "polarized", "standard"),
        closedness_samples=(),
        identity_residuals=residuals,
        notes=tuple(notes),
    )


def sigma_form_residuals(traj: LeafTrajectory) -> np.ndarray:
    """(sigma'')^2 + 4 (sigma')^3 + 2 t sigma' - 2 sigma on interior grid points.

    sigma = 2b, t = 2a; derivatives by fourth-order central differences, so the
    trajectory grid must be uniform.  An independent certificate that the leaf
    flow is the Painleve I Hamiltonian flow.
    """
    a = traj.a
    if len(a) < 7:
        return np.array([])
    spacing = np.diff(a)
    if np.max(np.abs(spacing - spacing[0])) > 1e-9 * abs(spacing[0]):
        raise ValueError("sigma-form residuals need a uniform a-grid")
    t = 2.0 * a
    sigma = 2.0 * traj.b
    h = t[1] - t[0]
    s = sigma
    first = (s[:-4] - 8.0 * s[1:-3] + 8.0 * s[3:-1] - s[4:]) / (12.0 * h)
    second = (-s[:-4] + 16.0 * s[1:-3] - 30.0 * s[2:-2] + 16.0 * s[3:-1] - s[4:]) / (
        12.0 * h * h
    )
    interior_t = t[2:-2]
    interior_s = s[2:-2]
    return second**2 + 4.0 * first**3 + 2.0 * interior_t * first - 2.0 * interior_s
