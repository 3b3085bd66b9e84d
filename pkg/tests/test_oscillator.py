"""Oscillator monodromy: transport, frames, Wronskians, coordinates."""
import cmath
import math

import numpy as np
import pytest

from taukit import elliptic as el
from taukit import oscillator as osc
from taukit.errors import PoleEvaluation, SectorDegeneracy

# shared fixture: moderate curve, fibre point in the central region
A, B = 0.5, 0.8
Q0 = 0.3 + 0.1j
P0 = cmath.sqrt(Q0**3 + A * Q0 + B)


def potential(eps=1.0, r=0.0, coeff=0.75):
    return osc.OscillatorPotential(A, B, Q0, P0, r, eps, second_order_coeff=coeff)


class _Synthetic:
    """Constant-coefficient stand-in for transport unit checks."""

    def __init__(self, func, q=1e9 + 0j):
        self.q = q
        self._func = func

    def value(self, x):
        return self._func(x)


class TestPotential:
    def test_constraint_enforced(self):
        with pytest.raises(ValueError):
            osc.OscillatorPotential(A, B, Q0, P0 + 0.1, 0.0, 1.0)

    def test_pole_evaluation(self):
        with pytest.raises(PoleEvaluation):
            potential().value(Q0)

    def test_r_zero_form(self):
        # with r = 0 only the cubic, the simple pole, and the double pole remain
        pot = potential(eps=0.7)
        x = 1.3 - 0.4j
        expected = (
            (x**3 + A * x + B) / 0.7**2
            + (P0 / (x - Q0)) / 0.7
            + 0.75 / (x - Q0) ** 2
        )
        assert abs(pot.value(x) - expected) < 1e-13 * abs(expected)

    def test_double_pole_coefficient(self):
        # coefficient of (x - q)^-2 extracted by a small circle average
        pot = potential(r=0.2)
        rho = 1e-4
        total = 0.0
        n = 64
        for k in range(n):
            w = rho * cmath.exp(2j * math.pi * k / n)
            total += pot.value(Q0 + w) * w**2
        assert abs(total / n - 0.75) < 1e-6

    def test_large_x_leading_behavior(self):
        pot = potential(eps=0.5)
        x = 300.0 + 100.0j
        assert abs(pot.value(x) / (x**3 / 0.25) - 1.0) < 1e-3

    def test_eps_squared_q_tends_to_cubic(self):
        # eps^2 Q - (x^3 + a x + b) = eps Q1 + eps^2 Q2 shrinks linearly in eps
        x = 1.7 - 0.6j
        cubic = x**3 + A * x + B
        gaps = []
        for eps in (1e-2, 5e-3):
            pot = potential(eps=eps, r=0.3)
            gaps.append(abs(eps**2 * pot.value(x) - cubic))
        assert gaps[1] < 0.6 * gaps[0]
        assert gaps[0] < 0.1

    def test_derivative_consistency(self):
        pot = potential(r=0.3 - 0.2j)
        x = 1.1 + 0.9j
        h = 1e-6
        fd = (pot.value(x + h) - pot.value(x - h)) / (2 * h)
        assert abs(pot.derivative(x) - fd) < 1e-7

    def test_turning_points_are_zeros(self):
        pot = potential(eps=0.8, r=0.1)
        for tp in pot.turning_points():
            assert abs(pot.value(tp)) < 1e-7


class TestIntegrateSchrodinger:
    def test_zero_potential_linear_solution(self):
        f, fp = osc.integrate_schrodinger(_Synthetic(lambda x: 0.0), [0, 1 + 0.5j], (1.0, 1.0))
        assert abs(f - (2 + 0.5j)) < 1e-12
        assert abs(fp - 1.0) < 1e-12

    def test_unit_potential_exponential(self):
        f, fp = osc.integrate_schrodinger(_Synthetic(lambda x: 1.0), [0, 1], (1.0, 1.0))
        assert abs(f - math.e) < 1e-9
        assert abs(fp - math.e) < 1e-9

    def test_linearity(self):
        pot = potential()
        path = [2 + 1j, 3.5 - 0.5j]
        u = osc.integrate_schrodinger(pot, path, (0.3, -0.1), rtol=1e-12)
        v = osc.integrate_schrodinger(pot, path, (0.0, 0.7j), rtol=1e-12)
        combo = osc.integrate_schrodinger(pot, path, (2 * 0.3, 2 * -0.1 + 0.7j * 1j * -1j), rtol=1e-12)
        assert abs(combo[0] - (2 * u[0] + v[0])) < 1e-9
        assert abs(combo[1] - (2 * u[1] + v[1])) < 1e-9

    def test_pole_proximity_raises(self):
        from taukit.errors import PoleProximity

        pot = potential()
        with pytest.raises(PoleProximity):
            osc.integrate_schrodinger(
                pot, [Q0 - 0.5, Q0 + 0.5], (1.0, 0.0), pole_margin=1e-2
            )

    def test_wronskian_constant_along_path(self):
        # short path so the solution growth does not swamp the comparison
        pot = potential()
        path = [2 + 1j, 2.15 + 1.3j, 2.4 + 1.1j]
        u0, v0 = (1.0, 0.2j), (0.5 - 1j, 1.0)
        u1 = osc.integrate_schrodinger(pot, path, u0, rtol=1e-12)
        v1 = osc.integrate_schrodinger(pot, path, v0, rtol=1e-12)
        w0 = u0[0] * v0[1] - u0[1] * v0[0]
        w1 = u1[0] * v1[1] - u1[1] * v1[0]
        assert abs(w1 - w0) < 1e-9 * abs(w0)


class TestMonodromy:
    def test_contractible_loop_identity(self):
        m = osc.monodromy_matrix(potential(), osc.loop_around(2.5 + 2j, 0.3), rtol=1e-12)
        assert np.max(np.abs(m - np.eye(2))) < 1e-8

    def test_apparent_singularity_trace(self):
        m = osc.monodromy_matrix(potential(r=0.25 + 0.1j), osc.loop_around(Q0, 0.15), rtol=1e-12)
        assert abs(np.trace(m) + 2.0) < 1e-6
        assert abs(np.linalg.det(m) - 1.0) < 1e-9

    def test_negative_control_coefficient(self):
        m = osc.monodromy_matrix(
            potential(coeff=0.76), osc.loop_around(Q0, 0.15), rtol=1e-12
        )
        assert abs(np.trace(m) + 2.0) > 1e-4

    def test_det_one_generic(self):
        m = osc.monodromy_matrix(potential(eps=0.6), osc.loop_around(Q0, 0.2), rtol=1e-12)
        assert abs(np.linalg.det(m) - 1.0) < 1e-9


class TestFrames:
    def test_recessive_profile(self):
        for k in (0, 2, 4):
            prof = osc.radial_profile(potential(), k, fractions=(0.0, 0.5, 1.0))
            assert prof[0] > prof[1] > prof[2]

    def test_adjacent_frames_independent(self):
        pot = potential()
        frames = [osc.subdominant_frame(pot, k) for k in range(5)]
        for j in range(5):
            w = osc.log_wronskian(pot, frames[j], frames[(j + 1) % 5])
            assert np.isfinite(w.real) and np.isfinite(w.imag)

    def test_rescaling_moves_log_scale_only(self):
        # cross-ratios are rescaling-invariant; doubling a frame's values while
        # halving exp(log_scale) is the identity on true solutions
        pot = potential()
        fr = osc.subdominant_frame(pot, 0)
        doubled = osc.FrameSolution(
            fr.sector, fr.anchor_angle, fr.anchor_radius,
            2 * fr.f, 2 * fr.fp, fr.log_scale - math.log(2.0),
        )
        other = osc.subdominant_frame(pot, 1)
        w1 = osc.log_wronskian(pot, fr, other)
        w2 = osc.log_wronskian(pot, doubled, other)
        assert abs(w1 - w2) < 1e-9

    def test_left_half_plane_rejected(self):
        with pytest.raises(SectorDegeneracy):
            osc.subdominant_frame(potential(eps=-1.0 + 0j), 0)

    def test_sector_rotation_with_arg_eps(self):
        pot = potential(eps=cmath.exp(0.3j))
        assert abs(osc.sector_angle(pot, 0) - 0.4 * 0.3) < 1e-14
        assert abs(osc.sector_angle(pot, 1) - (2 * math.pi / 5 + 0.12)) < 1e-14


class TestWronskians:
    def test_self_wronskian_degenerate(self):
        pot = potential()
        fr = osc.subdominant_frame(pot, 0)
        from taukit.errors import DegenerateWronskian

        with pytest.raises(DegenerateWronskian):
            osc.log_wronskian(pot, fr, fr)

    def test_antisymmetry(self):
        pot = potential()
        f0 = osc.subdominant_frame(pot, 0)
        f1 = osc.subdominant_frame(pot, 1)
        w01 = osc.log_wronskian(pot, f0, f1)
        w10 = osc.log_wronskian(pot, f1, f0)
        delta = w01 - w10 - 1j * math.pi
        assert abs(delta.real) < 1e-9
        assert min(abs(delta.imag % (2 * math.pi)), 2 * math.pi - delta.imag % (2 * math.pi)) < 1e-9

    def test_comparison_point_independence(self):
        pot = potential()
        f0 = osc.subdominant_frame(pot, 0)
        f2 = osc.subdominant_frame(pot, 2)
        w_a = osc.log_wronskian(pot, f0, f2)
        w_b = osc.log_wronskian(pot, f0, f2, at=osc.central_point(pot) + 0.2 - 0.1j)
        assert abs(w_a - w_b) < 1e-8

    def test_plain_value_matches_log(self):
        pot = potential(eps=2.0)
        f0 = osc.subdominant_frame(pot, 0)
        f1 = osc.subdominant_frame(pot, 1)
        lw = osc.log_wronskian(pot, f0, f1)
        assert abs(osc.wronskian(pot, f0, f1) - cmath.exp(lw)) < 1e-9 * abs(cmath.exp(lw))

    def test_wronskian_of_frame_with_itself_is_zero(self):
        pot = potential()
        fr = osc.subdominant_frame(pot, 0)
        assert osc.wronskian(pot, fr, fr) == 0

    def test_rescaled_init_scales_wronskian(self):
        pot = potential()
        f0 = osc.subdominant_frame(pot, 0)
        f1 = osc.subdominant_frame(pot, 1)
        lam = 2.5 - 1.0j
        scaled = osc.FrameSolution(
            f0.sector, f0.anchor_angle, f0.anchor_radius, lam * f0.f, lam * f0.fp, f0.log_scale
        )
        delta = osc.log_wronskian(pot, scaled, f1) - osc.log_wronskian(pot, f0, f1)
        assert abs(delta - cmath.log(lam)) < 1e-9

    def test_frame_diagnostics_round_trip(self):
        import json

        payload = osc.frame_diagnostics(potential(eps=1.2), rtol=1e-9)
        text = json.dumps(payload, sort_keys=True)
        assert json.loads(text) == payload
        assert len(payload["frames"]) == 5
        assert len(payload["log_wronskians"]) == 10


class TestFgCoordinates:
    def test_plucker_consistency(self):
        # the five carried frames form a consistent projective configuration
        pot = potential(eps=0.8)
        logs = osc.pairwise_log_wronskians(
            pot, pairs=tuple((j, k) for j in range(5) for k in range(j + 1, 5))
        )
        mean = sum(logs.values()) / len(logs)
        w = {}
        for (j, k), v in logs.items():
            w[(j, k)] = cmath.exp(v - mean)
            w[(k, j)] = -w[(j, k)]
        import itertools

        for quad in itertools.combinations(range(5), 4):
            aa, bb, cc, dd = quad
            res = w[(aa, bb)] * w[(cc, dd)] - w[(aa, cc)] * w[(bb, dd)] + w[(aa, dd)] * w[(bb, cc)]
            scale = sum(
                abs(w[(x, y)] * w[(u, v)])
                for (x, y), (u, v) in (((aa, bb), (cc, dd)), ((aa, cc), (bb, dd)), ((aa, dd), (bb, cc)))
            )
            assert abs(res) / scale < 1e-10

    def test_frame_rescaling_invariance(self):
        # fg built twice with different solver tolerance agrees (normalizations
        # and transports differ, the cross-ratio does not)
        pot = potential(eps=0.9)
        x_tight = osc.fg_coordinates(pot, rtol=1e-12)
        x_loose = osc.fg_coordinates(pot, rtol=1e-9, prev=x_tight)
        assert abs(x_tight[0] - x_loose[0]) < 1e-6
        assert abs(x_tight[1] - x_loose[1]) < 1e-6

    def test_radius_window_invariance(self):
        pot = potential(eps=0.9)
        x_a = osc.fg_coordinates(pot, radius_factor=4.0)
        x_b = osc.fg_coordinates(pot, radius_factor=5.0, prev=x_a)
        assert abs(x_a[0] - x_b[0]) < 1e-6
        assert abs(x_a[1] - x_b[1]) < 1e-6

    def test_small_eps_asymptotics(self):
        # x_i + z_i/eps - theta_i -> 0 at the calibrated fixture point (the
        # coordinate labeling is chamber-dependent, so the check lives in the
        # chamber where the shipped convention was frozen)
        from taukit import painleve1 as p1

        base = p1.reference_point()
        curve = base.curve()
        basis = el.default_cycle_basis(curve)
        z = el.periods(curve, basis)
        th = el.theta_coords(curve, base.fiber(), basis).values
        residuals = []
        prev = None
        for eps in (0.2, 0.1):
            pot = osc.OscillatorPotential(base.a, base.b, base.q, base.p, 0.0, eps)
            x = osc.fg_coordinates(pot, prev=prev)
            prev = x
            d1 = x[0] + z[0] / eps - th[0]
            d1 -= 2j * math.pi * round(d1.imag / (2 * math.pi))
            d2 = x[1] + z[1] / eps - th[1]
            d2 -= 2j * math.pi * round(d2.imag / (2 * math.pi))
            residuals.append(max(abs(d1), abs(d2)))
        assert residuals[1] < residuals[0]
        assert residuals[1] < 0.2
