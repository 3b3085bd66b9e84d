"""Uncoupled BPS structures: solution components, identities, tau integrals."""
import math

import numpy as np
import pytest

from taukit import bps, specfun
from taukit.errors import BranchCutError, DegenerateCharge
from taukit.forms import PotentialChoice, polyline

TWO_PI_I = 2j * math.pi


def d2_structure():
    return bps.UncoupledBpsStructure(
        half_rank=2,
        pairing=(1, 1),
        support=(
            ((1, 0), 1), ((-1, 0), 1),
            ((0, 1), 1), ((0, -1), 1),
            ((1, 1), 1), ((-1, -1), 1),
        ),
    )


def sample_point():
    return bps.CentralChargePoint((1 + 0.5j, 0.8 + 0.3j, -0.3 + 2j, 1.1), 0.9)


class TestStructureValidation:
    def test_asymmetric_support_rejected(self):
        with pytest.raises(ValueError):
            bps.UncoupledBpsStructure(1, (1,), (((1,), 1),))

    def test_mismatched_omega_rejected(self):
        with pytest.raises(ValueError):
            bps.UncoupledBpsStructure(1, (1,), (((1,), 1), ((-1,), 2)))

    def test_zero_pairing_rejected(self):
        with pytest.raises(ValueError):
            bps.UncoupledBpsStructure(1, (0,), ())

    def test_omega_eta_normalization(self):
        s = bps.UncoupledBpsStructure(1, (3,), ())
        eta = TWO_PI_I * 3
        assert abs(s.omega_skew()[0] * eta + 1.0) < 1e-15

    def test_json_roundtrip(self):
        s = d2_structure()
        assert bps.UncoupledBpsStructure.from_json(s.to_json()) == s

    def test_fixture_files(self):
        assert bps.load_fixture("bps_d1_minimal") == bps.minimal_d1()
        assert bps.load_fixture("bps_d2_basic") == d2_structure()
        assert bps.load_fixture("bps_conifold_n5") == bps.conifold_truncation(5)


class TestSolutionComponents:
    def test_empty_support_gives_zero_y(self):
        s = bps.UncoupledBpsStructure(2, (1, 2), ())
        pt = sample_point()
        assert np.all(bps.y_components(s, pt) == 0)
        assert np.all(bps.dlog_tau_gradient(s, pt) == 0)
        sym, hom = bps.relation_residuals(s, pt)
        assert np.all(sym == 0) and np.all(hom == 0)

    def test_empty_support_x_is_linear(self):
        s = bps.UncoupledBpsStructure(1, (1,), ())
        pt = bps.CentralChargePoint((2 + 1j, -0.5j), 0.3 + 0.1j)
        x = bps.x_components(s, pt)
        assert np.allclose(x, -np.array(pt.z) / pt.epsilon, rtol=0, atol=1e-15)

    def test_minimal_d1_y_formula(self):
        s = bps.minimal_d1()
        pt = bps.CentralChargePoint((1 + 0.5j, 0.8), 0.7 + 0.1j)
        y = bps.y_components(s, pt)
        w = pt.z[0] / (TWO_PI_I * pt.epsilon)
        omega12 = -1.0 / TWO_PI_I
        expected = -(specfun.log_lambda(w) - specfun.log_lambda(-w)) / (TWO_PI_I * omega12)
        assert y[0] == 0
        assert abs(y[1] - expected) < 1e-14

    def test_first_block_is_minus_z_over_eps(self):
        s = d2_structure()
        pt = sample_point()
        x = bps.x_components(s, pt)
        for i in range(2):
            assert abs(x[i] + pt.z[i] / pt.epsilon) < 1e-15

    def test_scaling_invariance_of_y(self):
        s = d2_structure()
        pt = sample_point()
        for lam in (0.5, 3.0):
            scaled = bps.CentralChargePoint(tuple(lam * z for z in pt.z), lam * pt.epsilon)
            assert np.max(np.abs(bps.y_components(s, scaled) - bps.y_components(s, pt))) < 1e-13

    def test_degenerate_charge_rejected(self):
        s = bps.minimal_d1()
        with pytest.raises(DegenerateCharge):
            bps.y_components(s, bps.CentralChargePoint((0.0, 1.0), 1.0))

    def test_cut_crossing_rejected(self):
        # z1 = -2*pi*i*eps*t makes w = -t land on the negative real axis
        s = bps.minimal_d1()
        with pytest.raises(BranchCutError):
            bps.y_components(s, bps.CentralChargePoint((TWO_PI_I * -3.0, 1.0), 1.0))


class TestGradient:
    def test_second_block_vanishes(self):
        g = bps.dlog_tau_gradient(d2_structure(), sample_point())
        assert np.all(g[2:] == 0)

    def test_matches_central_difference_in_eps(self):
        s = bps.minimal_d1()
        pt = bps.CentralChargePoint((1 + 0.5j, 0.8), 0.7)
        g = bps.dlog_tau_gradient(s, pt)
        h = 1e-6
        omega12 = s.omega_skew()[0]
        yp = bps.y_components(s, bps.CentralChargePoint(pt.z, pt.epsilon + h))
        ym = bps.y_components(s, bps.CentralChargePoint(pt.z, pt.epsilon - h))
        fd = -omega12 * (yp[1] - ym[1]) / (2 * h)
        assert abs(g[0] - fd) < 1e-8

    def test_euler_pairing_scale_invariant(self):
        s = d2_structure()
        pt = sample_point()
        pair = np.dot(bps.dlog_tau_gradient(s, pt), np.array(pt.z))
        scaled = bps.CentralChargePoint(tuple(2 * z for z in pt.z), 2 * pt.epsilon)
        pair2 = np.dot(bps.dlog_tau_gradient(s, scaled), np.array(scaled.z))
        assert abs(pair - pair2) < 1e-12 * max(1.0, abs(pair))


class TestRelations:
    def test_residuals_small_on_d2(self):
        sym, hom = bps.relation_residuals(d2_structure(), sample_point())
        assert np.max(np.abs(sym)) < 1e-12
        assert np.max(np.abs(hom)) < 1e-12

    def test_homogeneity_residual_scale_invariant(self):
        s = d2_structure()
        pt = sample_point()
        _, hom1 = bps.relation_residuals(s, pt)
        scaled = bps.CentralChargePoint(tuple(2 * z for z in pt.z), 2 * pt.epsilon)
        _, hom2 = bps.relation_residuals(s, scaled)
        assert np.max(np.abs(hom1 - hom2)) < 1e-12


class TestLogTau:
    chart = bps.bps_chart_id(bps.minimal_d1())

    def test_closed_loop_integrates_to_zero(self):
        s = bps.minimal_d1()
        loop = polyline(self.chart, [(1 + 0.5j, 0.8), (1.5 + 0.7j, 0.9), (1 + 0.5j, 0.8)])
        assert abs(bps.log_tau(s, loop, 0.7).log_tau) < 1e-12

    def test_path_independence_homotopic(self):
        s = bps.minimal_d1()
        direct = polyline(self.chart, [(1 + 0.5j, 0.8), (1.5 + 0.7j, 0.9)])
        detour = polyline(
            self.chart, [(1 + 0.5j, 0.8), (1.2 + 0.9j, 2.0), (1.5 + 0.7j, 0.9)]
        )
        a = bps.log_tau(s, direct, 0.7).log_tau
        b = bps.log_tau(s, detour, 0.7).log_tau
        assert abs(a - b) < 1e-8

    def test_homogeneity_under_joint_rescaling(self):
        s = bps.minimal_d1()
        base = [(1 + 0.5j, 0.8), (1.5 + 0.7j, 0.9)]
        value = bps.log_tau(s, polyline(self.chart, base), 0.7).log_tau
        for lam in (0.5, 2.0):
            scaled = [(lam * a, lam * b) for a, b in base]
            v = bps.log_tau(s, polyline(self.chart, scaled), lam * 0.7).log_tau
            assert abs(v - value) < 1e-9

    def test_wall_crossing_raises(self):
        # Im(z1) changes sign along the path, flipping Re(w) of the charge pair
        s = bps.minimal_d1()
        path = polyline(self.chart, [(1 + 0.5j, 0.8), (1 - 0.5j, 0.8)])
        with pytest.raises(BranchCutError):
            bps.log_tau(s, path, 0.7)

    def test_path_through_degenerate_charge_raises(self):
        from taukit.errors import PathThroughDegenerateLocus

        s = bps.minimal_d1()
        path = polyline(self.chart, [(-1.0, 0.8), (1.0, 0.8)])
        with pytest.raises(PathThroughDegenerateLocus):
            bps.log_tau(s, path, 0.7)

    def test_cut_crossing_mid_segment_raises(self):
        # w sweeps through the negative real axis between the endpoints even
        # though both endpoints are admissible
        s = bps.minimal_d1()
        eps = 0.7
        w0, w1 = -2.0 + 0.4j, -2.0 - 0.4j
        z0, z1 = w0 * 2j * np.pi * eps, w1 * 2j * np.pi * eps
        path = polyline(self.chart, [(z0, 0.8), (z1, 0.8)])
        with pytest.raises(BranchCutError):
            bps.log_tau(s, path, eps)

    def test_report_residuals_and_shift(self):
        s = bps.minimal_d1()
        path = polyline(self.chart, [(1 + 0.5j, 0.8), (1.5 + 0.7j, 0.9)])
        ref = bps.log_tau(s, path, 0.7)
        assert ref.shift_applied == 0
        assert max(ref.closedness_samples) < 1e-7
        assert ref.identity_residuals["relation_symmetry"] < 1e-10
        other = bps.log_tau(s, path, 0.7, PotentialChoice("canonical", "full", "standard"))
        data_end = bps.shift_data_at(s, bps.CentralChargePoint(path.end.coords, 0.7))
        data_start = bps.shift_data_at(s, bps.CentralChargePoint(path.start.coords, 0.7))
        expected = (
            data_end["ie_lambda_half"] + data_end["polarization_half"]
            - data_start["ie_lambda_half"] - data_start["polarization_half"]
        )
        assert abs((ref.log_tau - other.log_tau) - expected) < 1e-12


class TestConifoldTruncation:
    def test_support_enumeration(self):
        s = bps.conifold_truncation(1)
        expected = {((1, m), 1) for m in (-1, 0, 1)}
        expected |= {((-1, m), 1) for m in (-1, 0, 1)}
        expected |= {((0, 1), -2), ((0, -1), -2)}
        assert set(s.support) == expected
        assert len(s.support) == 8

    def test_charges_confined_to_first_block(self):
        # uncoupledness: every active charge lives in the first-d block by
        # construction of the charge basis
        s = bps.conifold_truncation(3)
        assert s.charge_matrix().shape == (16, 2)

    def test_truncation_stability(self):
        z_fix = (1 + 0.3j, 20 + 300j, 1.0, 1.0)
        z_end = (2 + 0.5j, 20 + 300j, 1.0, 1.0)
        chart = bps.bps_chart_id(bps.conifold_truncation(5))
        path = polyline(chart, [z_fix, z_end])
        v5 = bps.log_tau(bps.conifold_truncation(5), path, 0.5).log_tau
        v10 = bps.log_tau(bps.conifold_truncation(10), path, 0.5).log_tau
        assert abs(v5 - v10) < 1e-6
