"""Monodromy data of the deformed cubic oscillator f'' = Q f.

Q(x) = eps^-2 (x^3 + a x + b) + eps^-1 (p/(x-q) + r)
       + c2/(x-q)^2 + r/(2p(x-q)) + r^2/(4p^2),      c2 = 3/4,

with p^2 = q^3 + a q + b, which makes x = q an apparent singularity (local
exponents -1/2 and 3/2, SL2 monodromy of trace -2).  The c2 coefficient is a
diagnostic knob so the apparent-singularity condition can be negative-tested.

Five Stokes sectors at angles 2 pi k/5 + (2/5) arg(eps) carry recessive
solutions.  Frames are WKB-normalized at an outer radius and transported
inward; transport purifies the recessive direction, so the frame's direction
error is far below the solver tolerance.

Transport uses adaptive sixth-order Magnus steps: the 2x2 step exponential is
closed-form, each step is rescaled by exp(-mu) with mu accumulated in a
complex ledger, so magnitudes like exp(1e3) never materialize and the
imaginary parts of log-Wronskians stay exact (no mod-2pi folding).  The
generic transport operation (integrate_schrodinger) is an adaptive embedded
Runge-Kutta pair, used for synthetic checks and monodromy loops where the
accumulated phase is small.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateWronskian,
    PoleEvaluation,
    PoleProximity,
    SectorDegeneracy,
    StepUnderflow,
)

SQRT3 = math.sqrt(3.0)
TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class OscillatorPotential:
    """Parameters (a, b, q, p, r; eps) of the deformed cubic potential."""

    a: complex
    b: complex
    q: complex
    p: complex
    r: complex
    epsilon: complex
    second_order_coeff: complex = 0.75  # 3/4 for an apparent singularity

    def __post_init__(self):
        for name in ("a", "b", "q", "p", "r", "epsilon", "second_order_coeff"):
            object.__setattr__(self, name, complex(getattr(self, name)))
        if self.epsilon == 0:
            raise ValueError("epsilon must be nonzero")
        if self.p == 0:
            raise ValueError("p must be nonzero")
        lhs = self.p**2
        rhs = self.q**3 + self.a * self.q + self.b
        if abs(lhs - rhs) > 1e-9 * max(1.0, abs(lhs), abs(rhs)):
            raise ValueError("potential requires p^2 = q^3 + a q + b")

    def value(self, x: complex) -> complex:
        dx = x - self.q
        if dx == 0:
            raise PoleEvaluation("Q evaluated at its pole x = q")
        inv_eps = 1.0 / self.epsilon
        return (
            inv_eps * inv_eps * (x**3 + self.a * x + self.b)
            + inv_eps * (self.p / dx + self.r)
            + self.second_order_coeff / (dx * dx)
            + self.r / (2.0 * self.p * dx)
            + self.r**2 / (4.0 * self.p**2)
        )

    def derivative(self, x: complex) -> complex:
        dx = x - self.q
        if dx == 0:
            raise PoleEvaluation("Q' evaluated at its pole x = q")
        inv_eps = 1.0 / self.epsilon
        return (
            inv_eps * inv_eps * (3.0 * x**2 + self.a)
            - inv_eps * self.p / dx**2
            - 2.0 * self.second_order_coeff / dx**3
            - self.r / (2.0 * self.p * dx**2)
        )

    def branch_points(self) -> np.ndarray:
        return np.sort_complex(np.roots([1.0, 0.0, self.a, self.b]))

    def turning_points(self) -> np.ndarray:
        """Zeros of Q, i.e. roots of (x - q)^2 Q(x) (a quintic)."""
        inv_eps2 = 1.0 / self.epsilon**2
        inv_eps = 1.0 / self.epsilon
        lin = np.array([1.0, -self.q])
        sq = np.polymul(lin, lin)
        poly = inv_eps2 * np.polymul([1.0, 0.0, self.a, self.b], sq)
        poly = np.polyadd(poly, inv_eps * self.p * lin)
        poly = np.polyadd(poly, (inv_eps * self.r + self.r**2 / (4 * self.p**2)) * sq)
        poly = np.polyadd(poly, self.r / (2 * self.p) * lin)
        poly = np.polyadd(poly, np.array([self.second_order_coeff]))
        return np.roots(poly)


def evaluate_Q(pot: OscillatorPotential, x: complex) -> complex:
    """The potential value; leading behavior eps^-2 x^3 at large |x|."""
    return pot.value(x)


# --------------------------------------------------------------------------
# adaptive embedded Runge-Kutta (Dormand-Prince 5(4)) on the first-order system
# --------------------------------------------------------------------------

_DP_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_DP_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_DP_B5 = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_DP_B4 = (5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40)


def _rk_segment(pot, x0, x1, f, fp, rtol, pole_margin, max_steps):
    span = x1 - x0

    def rhs(s, y):
        x = x0 + s * span
        if abs(x - pot.q) < pole_margin:
            raise PoleProximity(f"path point {x} within {pole_margin:g} of x = q")
        return np.array([span * y[1], span * pot.value(x) * y[0]])

    y = np.array([f, fp], dtype=complex)
    s = 0.0
    h = 0.05
    steps = 0
    while s < 1.0:
        if steps > max_steps:
            raise StepUnderflow("step budget exhausted in integrate_schrodinger")
        h = min(h, 1.0 - s)
        k = []
        for i in range(7):
            yi = y.copy()
            for j, aij in enumerate(_DP_A[i]):
                if aij:
                    yi = yi + h * aij * k[j]
            k.append(rhs(s + _DP_C[i] * h, yi))
        y5 = y + h * sum(b * kk for b, kk in zip(_DP_B5, k))
        y4 = y + h * sum(b * kk for b, kk in zip(_DP_B4, k))
        scale = np.maximum(np.abs(y), np.abs(y5)) + 1e-300
        err = float(np.max(np.abs(y5 - y4) / scale))
        if err <= rtol:
            s += h
            y = y5
        factor = 0.9 * (rtol / max(err, 1e-300)) ** 0.2
        h *= min(5.0, max(0.2, factor))
        if h < 1e-13:
            raise StepUnderflow("step size underflow in integrate_schrodinger")
        steps += 1
    return y[0], y[1]


def integrate_schrodinger(
    pot: OscillatorPotential,
    path,
    init: tuple[complex, complex],
    rtol: float = 1e-10,
    pole_margin: float = 1e-6,
    max_steps: int = 200000,
) -> tuple[complex, complex]:
    """Transport (f, f') along a polyline in the x-plane.

    Linear in ``init`` to solver tolerance; the Wronskian of two transported
    solutions is constant along the path (Abel's identity, no f' term).
    """
    pts = [complex(v) for v in path]
    if len(pts) < 2:
        raise ValueError("path needs at least two points")
    f, fp = complex(init[0]), complex(init[1])
    for x0, x1 in zip(pts, pts[1:]):
        if x0 == x1:
            continue
        f, fp = _rk_segment(pot, x0, x1, f, fp, rtol, pole_margin, max_steps)
    return f, fp


def monodromy_matrix(pot: OscillatorPotential, loop, rtol: float = 1e-11) -> np.ndarray:
    """Transport matrix of the fundamental pair around a closed polyline."""
    pts = [complex(v) for v in loop]
    if abs(pts[0] - pts[-1]) > 1e-12 * (1.0 + abs(pts[0])):
        raise ValueError("loop must close on itself")
    col1 = integrate_schrodinger(pot, pts, (1.0, 0.0), rtol=rtol)
    col2 = integrate_schrodinger(pot, pts, (0.0, 1.0), rtol=rtol)
    return np.array([[col1[0], col2[0]], [col1[1], col2[1]]])


def loop_around(center: complex, radius: float, segments: int = 16) -> list[complex]:
    """A closed polygonal loop encircling ``center`` once, counterclockwise."""
    pts = [
        center + radius * cmath.exp(2j * math.pi * k / segments)
        for k in range(segments)
    ]
    pts.append(pts[0])
    return pts


# --------------------------------------------------------------------------
# Magnus transport with complex rescaling ledger
# --------------------------------------------------------------------------


_GAUSS3_OFFSET = math.sqrt(15.0) / 10.0


def _comm(a, b):
    """Commutator of 2x2 matrices given as (m11, m12, m21, m22) tuples."""
    a11, a12, a21, a22 = a
    b11, b12, b21, b22 = b
    return (
        a12 * b21 - a21 * b12,
        a11 * b12 + a12 * b22 - b11 * a12 - b12 * a22,
        a21 * b11 + a22 * b21 - b21 * a11 - b22 * a21,
        a21 * b12 - a12 * b21,
    )


def _magnus_step(pot, x_of, dx_of, s, h):
    """Rescaled step matrix exp(-mu) exp(Omega) over [s, s+h], plus mu.

    Sixth-order Magnus on three Gauss-Legendre nodes (the standard
    three-commutator scheme); Omega is traceless, so the exponential is
    cosh(mu) I + sinh(mu)/mu Omega with mu^2 = det-free quadratic invariant.
    """
    g1 = s + h * (0.5 - _GAUSS3_OFFSET)
    g2 = s + 0.5 * h
    g3 = s + h * (0.5 + _GAUSS3_OFFSET)
    c1, c2, c3 = dx_of(g1), dx_of(g2), dx_of(g3)
    q1, q2, q3 = pot.value(x_of(g1)), pot.value(x_of(g2)), pot.value(x_of(g3))
    a1 = (0.0, h * c1, h * c1 * q1, 0.0)
    a2 = (0.0, h * c2, h * c2 * q2, 0.0)
    a3 = (0.0, h * c3, h * c3 * q3, 0.0)
    sq15_3 = math.sqrt(15.0) / 3.0
    al1 = a2
    al2 = tuple(sq15_3 * (u - v) for u, v in zip(a3, a1))
    al3 = tuple((10.0 / 3.0) * (u - 2.0 * v + w) for u, v, w in zip(a1, a2, a3))
    c_1 = _comm(al1, al2)
    c_2 = _comm(al1, tuple(2.0 * u + v for u, v in zip(al3, c_1)))
    c_2 = tuple(-u / 60.0 for u in c_2)
    lhs = tuple(-20.0 * u - v + w for u, v, w in zip(al1, al3, c_1))
    rhs = tuple(u + v for u, v in zip(al2, c_2))
    tail = _comm(lhs, rhs)
    o11 = al1[0] + al3[0] / 12.0 + tail[0] / 240.0
    o12 = al1[1] + al3[1] / 12.0 + tail[1] / 240.0
    o21 = al1[2] + al3[2] / 12.0 + tail[2] / 240.0
    o22 = al1[3] + al3[3] / 12.0 + tail[3] / 240.0
    # traceless to roundoff; split off any residue for exactness of mu
    half_trace = 0.5 * (o11 + o22)
    d11, d22 = o11 - half_trace, o22 - half_trace
    mu = cmath.sqrt(d11 * d11 + o12 * o21)
    if mu.real < 0 or (mu.real == 0 and mu.imag < 0):
        mu = -mu
    if abs(mu) < 1e-6:
        half_diff = 1.0 - mu + (2.0 / 3.0) * mu * mu
        half_sum = 1.0 - mu + mu * mu
    else:
        em = cmath.exp(-2.0 * mu)
        half_diff = (1.0 - em) / (2.0 * mu)
        half_sum = 0.5 * (1.0 + em)
    return (
        half_sum + half_diff * d11,
        half_diff * o12,
        half_diff * o21,
        half_sum + half_diff * d22,
        mu + half_trace,
    )


def _magnus_transport(pot, x_of, dx_of, state, rtol=1e-11, max_steps=200000):
    """Transport ``state`` = (f, f') along x(s), s in [0, 1].

    Returns (f, f', ledger) with the true solution equal to
    exp(ledger) * (f, f'); the ledger collects the per-step mu factors and
    occasional magnitude rescalings, all with exact complex bookkeeping.
    """
    f, fp = complex(state[0]), complex(state[1])
    ledger = 0.0 + 0.0j
    s = 0.0
    h = 0.01
    steps = 0
    while s < 1.0:
        if steps > max_steps:
            raise StepUnderflow("step budget exhausted in Magnus transport")
        h = min(h, 1.0 - s)
        m11, m12, m21, m22, mu_f = _magnus_step(pot, x_of, dx_of, s, h)
        n11, n12, n21, n22, mu_1 = _magnus_step(pot, x_of, dx_of, s, 0.5 * h)
        o11, o12, o21, o22, mu_2 = _magnus_step(pot, x_of, dx_of, s + 0.5 * h, 0.5 * h)
        # halves product
        p11 = o11 * n11 + o12 * n21
        p12 = o11 * n12 + o12 * n22
        p21 = o21 * n11 + o22 * n21
        p22 = o21 * n12 + o22 * n22
        # compare on the current state, with the exponent mismatch restored
        mismatch = mu_f - mu_1 - mu_2
        gf = p11 * f + p12 * fp
        gfp = p21 * f + p22 * fp
        weight = 1.0 + math.sqrt(abs(pot.value(x_of(s + 0.5 * h))))
        norm = max(abs(gf), abs(gfp) / weight) + 1e-300
        if abs(mismatch.real) > 50.0:
            err = float("inf")
        else:
            fac = cmath.exp(mismatch)
            ef = fac * (m11 * f + m12 * fp) - gf
            efp = fac * (m21 * f + m22 * fp) - gfp
            err = max(abs(ef), abs(efp) / weight) / norm
        if err <= rtol:
            s += h
            f, fp = gf, gfp
            ledger += mu_1 + mu_2
            mag = max(abs(f), abs(fp))
            if mag > 1e6 or mag < 1e-6:
                f /= mag
                fp /= mag
                ledger += math.log(mag)
        factor = 0.9 * (rtol / max(err, 1e-300)) ** (1.0 / 7.0)
        h *= min(4.0, max(0.2, factor))
        if h < 1e-13:
            raise StepUnderflow("step size underflow in Magnus transport")
        steps += 1
    return f, fp, ledger


def _line_path(x0: complex, x1: complex):
    span = x1 - x0
    return (lambda s: x0 + s * span), (lambda s: span)


# --------------------------------------------------------------------------
# subdominant frames and Fock-Goncharov coordinates
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class FrameSolution:
    """Recessive solution of one Stokes sector, held at its anchor.

    The true solution values are exp(log_scale) * (f, fp); the stored pair is
    rescaled to order one.  Coordinate cross-ratios are invariant under frame
    rescaling, so log_scale only matters for exact log-Wronskian bookkeeping.
    """

    sector: int
    anchor_angle: float
    anchor_radius: float
    f: complex
    fp: complex
    log_scale: complex


def sector_angle(pot: OscillatorPotential, k: int) -> float:
    """Recessive ray of sector k: 2 pi k / 5 rotated by (2/5) arg(eps)."""
    return TWO_PI * k / 5.0 + 0.4 * cmath.phase(pot.epsilon)


def frame_radii(pot: OscillatorPotential, radius_factor: float = 4.0, outer_factor: float = 2.0):
    scale = float(np.max(np.abs(pot.branch_points())))
    radius = radius_factor * (1.0 + scale)
    return radius, outer_factor * radius


def subdominant_frame(
    pot: OscillatorPotential,
    k: int,
    radius_factor: float = 4.0,
    outer_factor: float = 2.0,
    rtol: float = 1e-11,
) -> FrameSolution:
    """WKB-normalized recessive solution of sector k, transported to |x| = R."""
    if pot.epsilon.real <= 0:
        raise SectorDegeneracy("frames require eps in the right half-plane")
    if not 0 <= k <= 4:
        raise ValueError("sector index must lie in 0..4")
    radius, outer = frame_radii(pot, radius_factor, outer_factor)
    angle = sector_angle(pot, k)

    inner_guard, outer_guard = 0.85 * radius, 1.05 * outer
    for tp in pot.turning_points():
        if inner_guard <= abs(tp) <= outer_guard:
            raise SectorDegeneracy(
                f"turning point {tp} inside the anchor annulus [{inner_guard:.3g}, {outer_guard:.3g}]"
            )
    if abs(pot.q) >= inner_guard:
        raise SectorDegeneracy("apparent singularity inside the anchor annulus")

    x_anchor = radius * cmath.exp(1j * angle)
    ratio = abs(pot.value(x_anchor) - x_anchor**3 / pot.epsilon**2) / abs(
        x_anchor**3 / pot.epsilon**2
    )
    if ratio >= 0.1:
        raise SectorDegeneracy(
            f"anchor radius too small: relative potential remainder {ratio:.3g} >= 0.1"
        )

    x_out = outer * cmath.exp(1j * angle)
    q_out = pot.value(x_out)
    sqrt_q = cmath.sqrt(q_out)
    direction = cmath.exp(1j * angle)
    if (direction * sqrt_q).real < 0:
        sqrt_q = -sqrt_q
    if abs((direction * sqrt_q).real) < 1e-3 * abs(sqrt_q):
        raise SectorDegeneracy("anchor ray runs along a Stokes line")
    amp = cmath.exp(-0.25 * cmath.log(q_out))
    f0 = amp
    fp0 = -amp * (sqrt_q + pot.derivative(x_out) / (4.0 * q_out))

    x_of, dx_of = _line_path(x_out, x_anchor)
    f, fp, ledger = _magnus_transport(pot, x_of, dx_of, (f0, fp0), rtol=rtol)
    mag = max(abs(f), abs(fp))
    return FrameSolution(
        sector=k,
        anchor_angle=angle,
        anchor_radius=radius,
        f=f / mag,
        fp=fp / mag,
        log_scale=ledger + math.log(mag),
    )


def radial_profile(
    pot: OscillatorPotential, k: int, fractions=(0.0, 0.25, 0.5, 0.75, 1.0), **kwargs
) -> list[float]:
    """log|f| of the sector-k frame at radii R + t (R_out - R); decreasing in t.

    Sampled during a single inward transport from the WKB initialization;
    re-transporting a recessive solution outward would amplify the dominant
    contamination instead.
    """
    rtol = kwargs.pop("rtol", 1e-11)
    radius_factor = kwargs.pop("radius_factor", 4.0)
    outer_factor = kwargs.pop("outer_factor", 2.0)
    radius, outer = frame_radii(pot, radius_factor, outer_factor)
    angle = sector_angle(pot, k)
    direction = cmath.exp(1j * angle)
    x_out = outer * direction
    q_out = pot.value(x_out)
    sqrt_q = cmath.sqrt(q_out)
    if (direction * sqrt_q).real < 0:
        sqrt_q = -sqrt_q
    amp = cmath.exp(-0.25 * cmath.log(q_out))
    state = (amp, -amp * (sqrt_q + pot.derivative(x_out) / (4.0 * q_out)))
    ledger = 0.0 + 0.0j
    radii = [radius + t * (outer - radius) for t in fractions]
    order = np.argsort(radii)[::-1]  # integrate inward: largest radius first
    values = {}
    current = outer
    for idx in order:
        target = radii[idx]
        if target < current:
            x_of, dx_of = _line_path(current * direction, target * direction)
            f, fp, step_ledger = _magnus_transport(pot, x_of, dx_of, state, rtol=rtol)
            state = (f, fp)
            ledger += step_ledger
            current = target
        values[idx] = math.log(abs(state[0])) + ledger.real
    return [values[i] for i in range(len(fractions))]


def central_point(pot: OscillatorPotential) -> complex:
    """Deterministic Wronskian comparison point in the turning-point region.

    Far enough from the apparent singularity that transports stay regular.
    Wronskians of non-adjacent frames must be evaluated here: at large radius
    the two frames share their dominant direction and the bracket cancels
    below double precision, while in the central region the contrast is only
    the Voros scale exp(Re(period)/|eps|).
    """
    scale = 1.0 + float(np.max(np.abs(pot.branch_points())))
    if abs(pot.q) >= 0.35 * scale:
        return 0.0 + 0.0j
    direction = pot.q / abs(pot.q) if pot.q != 0 else cmath.exp(1j * math.pi / 7.0)
    return -0.5 * scale * direction


def _transport_to_point(pot, frame: FrameSolution, target: complex, rtol: float):
    """Carry a frame from its anchor to ``target`` along a straight segment."""
    start = frame.anchor_radius * cmath.exp(1j * frame.anchor_angle)
    if target == start:
        return frame.f, frame.fp, frame.log_scale
    x_of, dx_of = _line_path(start, target)
    f, fp, ledger = _magnus_transport(pot, x_of, dx_of, (frame.f, frame.fp), rtol=rtol)
    return f, fp, frame.log_scale + ledger


def log_wronskian(
    pot: OscillatorPotential,
    frame_a: FrameSolution,
    frame_b: FrameSolution,
    at: complex | None = None,
    rtol: float = 1e-11,
) -> complex:
    """log of Wr(frame_a, frame_b) = f_a f_b' - f_a' f_b at a common point.

    Both frames are transported radially to ``at`` (default: the central
    comparison point); the imaginary part is exact (no mod-2 pi folding)
    because every rescaling factor is tracked in a complex ledger.
    """
    if at is None:
        at = central_point(pot)
    fa, fpa, la = _transport_to_point(pot, frame_a, at, rtol)
    fb, fpb, lb = _transport_to_point(pot, frame_b, at, rtol)
    bracket = fa * fpb - fpa * fb
    floor = 1e-12 * (abs(fa) * abs(fpb) + abs(fpa) * abs(fb))
    if abs(bracket) <= floor:
        raise DegenerateWronskian(
            f"Wronskian of sectors {frame_a.sector},{frame_b.sector} vanished"
        )
    return cmath.log(bracket) + la + lb


def wronskian(
    pot: OscillatorPotential,
    frame_a: FrameSolution,
    frame_b: FrameSolution,
    at: complex | None = None,
    rtol: float = 1e-11,
) -> complex:
    """Wr(frame_a, frame_b) at the comparison point (may overflow for large
    WKB phases; prefer log_wronskian for coordinate work).  Returns exactly 0
    for a numerically degenerate pair (in particular a frame with itself)."""
    try:
        return cmath.exp(log_wronskian(pot, frame_a, frame_b, at=at, rtol=rtol))
    except DegenerateWronskian:
        return 0.0 + 0.0j


def frame_diagnostics(
    pot: OscillatorPotential,
    rtol: float = 1e-11,
    radius_factor: float = 4.0,
    outer_factor: float = 2.0,
) -> dict:
    """JSON-ready dump of the five frames and their pairwise log-Wronskians."""
    frames = [
        subdominant_frame(pot, k, radius_factor, outer_factor, rtol=rtol)
        for k in range(5)
    ]
    pairs = tuple((j, k) for j in range(5) for k in range(j + 1, 5))
    logs = pairwise_log_wronskians(pot, rtol, radius_factor, outer_factor, pairs=pairs)

    def c(z):
        return [z.real, z.imag]

    return {
        "epsilon": c(pot.epsilon),
        "comparison_point": c(central_point(pot)),
        "frames": [
            {
                "sector": fr.sector,
                "anchor_angle": fr.anchor_angle,
                "anchor_radius": fr.anchor_radius,
                "f": c(fr.f),
                "fp": c(fr.fp),
                "log_scale": c(fr.log_scale),
            }
            for fr in frames
        ],
        "log_wronskians": {f"{j}{k}": c(v) for (j, k), v in logs.items()},
    }


_FG_PAIRS = ((0, 1), (1, 2), (2, 3), (3, 4), (1, 3), (0, 4), (0, 3))


def pairwise_log_wronskians(
    pot: OscillatorPotential,
    rtol: float = 1e-11,
    radius_factor: float = 4.0,
    outer_factor: float = 2.0,
    pairs=_FG_PAIRS,
) -> dict[tuple[int, int], complex]:
    """log Wr(frame_j, frame_k) for the requested (j < k) pairs, all evaluated
    at the central comparison point with one transport per frame."""
    frames = [
        subdominant_frame(pot, k, radius_factor, outer_factor, rtol=rtol)
        for k in range(5)
    ]
    at = central_point(pot)
    carried = [_transport_to_point(pot, fr, at, rtol) for fr in frames]
    logs = {}
    for j, k in pairs:
        fa, fpa, la = carried[j]
        fb, fpb, lb = carried[k]
        bracket = fa * fpb - fpa * fb
        floor = 1e-12 * (abs(fa) * abs(fpb) + abs(fpa) * abs(fb))
        if abs(bracket) <= floor:
            raise DegenerateWronskian(f"Wronskian of sectors {j},{k} vanished")
        logs[(j, k)] = cmath.log(bracket) + la + lb
    return logs


def fg_coordinates(
    pot: OscillatorPotential,
    rtol: float = 1e-11,
    radius_factor: float = 4.0,
    outer_factor: float = 2.0,
    prev: tuple[complex, complex] | None = None,
) -> tuple[complex, complex]:
    """Logarithmic Fock-Goncharov coordinates of the five-sector pentagon.

    With w_jk = Wr(frame_j, frame_k) and L_jk = log w_jk (exact imaginary
    parts via the transport ledgers),

        x1 = L01 + L34 - L13 - L04,
        x2 = L12 + L03 - L01 - L23.

    The per-frame normalizations cancel in both combinations.  This pairing
    of quadrilateral cross-ratios with the period-chart labels was calibrated
    once against the small-eps asymptotics x_i ~ -z_i/eps + theta_i and the
    closedness of the assembled tau differential (the competing candidate
    combination fails closedness by O(1)), then frozen.

    Branch continuity along a declared parameter path is handled by passing
    the previous value as ``prev``: the result is snapped by multiples of
    2 pi i to the nearest continuation, never re-folded mid-path.
    """
    logs = pairwise_log_wronskians(pot, rtol, radius_factor, outer_factor)
    x1 = logs[(0, 1)] + logs[(3, 4)] - logs[(1, 3)] - logs[(0, 4)]
    x2 = logs[(1, 2)] + logs[(0, 3)] - logs[(0, 1)] - logs[(2, 3)]
    if prev is not None:
        x1 -= 2j * math.pi * round((x1 - prev[0]).imag / TWO_PI)
        x2 -= 2j * math.pi * round((x2 - prev[1]).imag / TWO_PI)
    return x1, x2
