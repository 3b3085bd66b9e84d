"""1-form calculus: path integration, closedness residuals, potential shifts."""
import numpy as np
import pytest

from taukit import forms
from taukit.errors import MissingShiftDatum, NonFiniteEvaluation
from taukit.forms import ChartPoint, OneFormField, Polyline, PotentialChoice, polyline


def d_of_product():
    # d(z1 z2): coefficients (z2, z1)
    return OneFormField("c2", 2, lambda p: np.array([p.coords[1], p.coords[0]]))


def d_of_z1sq_z2():
    # d(z1^2 z2): coefficients (2 z1 z2, z1^2)
    return OneFormField(
        "c2", 2, lambda p: np.array([2 * p.coords[0] * p.coords[1], p.coords[0] ** 2])
    )


class TestPolyline:
    def test_validation(self):
        with pytest.raises(ValueError):
            Polyline((ChartPoint("c", (0,)),))
        with pytest.raises(ValueError):
            polyline("c", [(0, 0), (0, 0)])
        with pytest.raises(ValueError):
            Polyline((ChartPoint("a", (0,)), ChartPoint("b", (1,))))

    def test_join_and_reverse(self):
        p = polyline("c", [(0,), (1,)])
        q = polyline("c", [(1,), (2,)])
        assert p.joined(q).points[-1].coords == (2 + 0j,)
        assert p.reversed().points[0].coords == (1 + 0j,)


class TestIntegrateOneForm:
    def test_exact_differential(self):
        path = polyline("c2", [(0, 0), (1, 2)])
        value = forms.integrate_one_form(d_of_product(), path)
        assert abs(value - 2.0) < 1e-12

    def test_constant_form_linear_case(self):
        c = 3.5 - 1.25j
        form = OneFormField("c2", 2, lambda p: np.array([c, 0.0]))
        length = 2.0 + 1.0j
        path = polyline("c2", [(0, 5), (length, 5)])
        assert abs(forms.integrate_one_form(form, path) - c * length) < 1e-12

    def test_gradient_theorem_on_crooked_path(self):
        form = d_of_z1sq_z2()
        path = polyline("c2", [(0.3, -1), (1 + 1j, 0.5), (2, 2 - 1j)])
        start, end = path.start.coords, path.end.coords
        expected = end[0] ** 2 * end[1] - start[0] ** 2 * start[1]
        assert abs(forms.integrate_one_form(form, path) - expected) < 1e-11

    def test_additivity_and_reversal(self):
        form = OneFormField(
            "c2",
            2,
            lambda p: np.array(
                [np.exp(p.coords[0]) * p.coords[1], np.cos(p.coords[0] + p.coords[1])]
            ),
        )
        first = polyline("c2", [(0, 0), (0.7, 0.4)])
        second = polyline("c2", [(0.7, 0.4), (1.1, -0.2)])
        joined = first.joined(second)
        a = forms.integrate_one_form(form, first)
        b = forms.integrate_one_form(form, second)
        c = forms.integrate_one_form(form, joined)
        assert abs(a + b - c) < 1e-11
        assert abs(forms.integrate_one_form(form, joined.reversed()) + c) < 1e-11

    def test_linearity_in_form(self):
        f = d_of_product()
        g = d_of_z1sq_z2()
        combo = OneFormField(
            "c2", 2, lambda p: 2.0 * f.evaluator(p) - 1j * g.evaluator(p)
        )
        path = polyline("c2", [(0.1, 0.2), (0.9, 1.4)])
        lhs = forms.integrate_one_form(combo, path)
        rhs = 2.0 * forms.integrate_one_form(f, path) - 1j * forms.integrate_one_form(g, path)
        assert abs(lhs - rhs) < 1e-11

    def test_non_finite_evaluator(self):
        bad = OneFormField("c1", 1, lambda p: np.array([np.inf + 0j]))
        path = polyline("c1", [(-1,), (1,)])
        with pytest.raises(NonFiniteEvaluation):
            forms.integrate_one_form(bad, path)


class TestDResidual:
    def test_exact_form_residual_small(self):
        res = forms.d_residual(d_of_z1sq_z2(), ChartPoint("c2", (0.7, -0.3)))
        assert np.max(np.abs(res)) < 1e-9

    def test_wedge_coefficient(self):
        # form (0, z1) has d = dz1 ^ dz2, so entry (1,2) = 1 (1-indexed).
        form = OneFormField("c2", 2, lambda p: np.array([0.0, p.coords[0]]))
        res = forms.d_residual(form, ChartPoint("c2", (0.4, 1.2)))
        assert abs(res[0, 1] - 1.0) < 1e-9
        assert abs(res[1, 0] + 1.0) < 1e-9

    def test_second_order_convergence(self):
        # cubic coefficients give a nonzero third derivative: residual ~ step^2
        form = OneFormField(
            "c2",
            2,
            lambda p: np.array([np.sin(p.coords[0]) * p.coords[1] ** 3, 0.0]),
        )
        pt = ChartPoint("c2", (0.9, 0.8))
        exact = 3 * np.sin(0.9) * 0.8**2
        err = []
        for h in (1e-3, 5e-4):
            res = forms.d_residual(form, pt, step=h)
            err.append(abs(res[1, 0] - exact))
        assert err[1] < 0.3 * err[0]

    def test_antisymmetry(self):
        res = forms.d_residual(d_of_product(), ChartPoint("c2", (1.0, 2.0)))
        assert np.max(np.abs(res + res.T)) == 0.0


class TestPotentialShifts:
    data = {"ie_lambda_half": 0.3 - 0.1j, "polarization_half": 1.25j, "flip_term": -0.75}

    def test_identity_on_equal_choices(self):
        choice = PotentialChoice("liouville", "polarized", "flipped")
        assert forms.shift_by_potential_change(2.5j, choice, choice, {}) == 2.5j

    def test_polarization_shift(self):
        full = PotentialChoice("canonical", "full", "standard")
        pol = PotentialChoice("canonical", "polarized", "standard")
        x1, x2, omega12 = 0.7 + 0.2j, -1.1j, 1.0 / (2j * np.pi)
        datum = 0.5 * omega12 * x1 * x2
        out = forms.shift_by_potential_change(0.0, full, pol, {"polarization_half": datum})
        assert abs(out - datum) < 1e-15

    def test_flip_adds_k(self):
        std = PotentialChoice("canonical", "full", "standard")
        flip = PotentialChoice("canonical", "full", "flipped")
        out = forms.shift_by_potential_change(1.0, std, flip, self.data)
        assert abs(out - (1.0 + self.data["flip_term"])) < 1e-15

    def test_group_action(self):
        a = PotentialChoice("liouville", "full", "standard")
        m = PotentialChoice("canonical", "polarized", "flipped")
        b = PotentialChoice("hamiltonian", "full", "flipped")
        via = forms.shift_by_potential_change(
            forms.shift_by_potential_change(0.4j, a, m, self.data), m, b, self.data
        )
        direct = forms.shift_by_potential_change(0.4j, a, b, self.data)
        assert abs(via - direct) < 1e-15  # shift multiples compose exactly; only
        # the order of float additions differs

    def test_missing_datum(self):
        a = PotentialChoice("canonical", "full", "standard")
        b = PotentialChoice("hamiltonian", "full", "standard")
        with pytest.raises(MissingShiftDatum):
            forms.shift_by_potential_change(0.0, a, b, {})

    def test_invalid_choice_names(self):
        with pytest.raises(ValueError):
            PotentialChoice("weird", "full", "standard")


def test_tau_report_roundtrip():
    report = forms.TauReport(
        log_tau=1.5 - 0.5j,
        chart_id="c2",
        start=(0j, 0j),
        end=(1 + 0j, 2 + 0j),
        epsilon=0.5 + 0j,
        potential_choice=PotentialChoice(),
        closedness_samples=(1e-9,),
        identity_residuals={"homogeneity": 2e-12},
    )
    import json

    payload = json.loads(report.to_json())
    assert payload["log_tau"] == [1.5, -0.5]
    assert payload["potential_choice"]["theta0"] == "hamiltonian"
    assert payload["identity_residuals"]["homogeneity"] == 2e-12
