"""Rao-Fisher metric on the simplex and the metric induced on the model curve."""

import numpy as np
import pytest

from modbase import *
from model import Outcome, SpinModel
from geometry import *


class TestSimplex:

    def test_uniform_metric(self):
        np.testing.assert_array_equal(simplex_metric(SimplexPoint([0.25] * 4)), np.diag([4.0] * 4))
        np.testing.assert_array_equal(simplex_metric(SimplexPoint([0.5, 0.5])), np.diag([2.0, 2.0]))

    def test_boundary(self):
        with pytest.raises(BoundaryError) as info:
            simplex_metric(SimplexPoint([0.0, 1.0, 0.0, 0.0]))
        assert info.value.cell == 0

    @pytest.mark.parametrize("p", [[1.0], [0.6, 0.6], [-0.1, 1.1]])
    def test_invalid_points(self, p):
        with pytest.raises(InvalidArgumentError):
            SimplexPoint(p)

    def test_to_amplitudes(self):
        np.testing.assert_allclose(to_amplitudes(SimplexPoint([0.25] * 4)).q, [1.0] * 4)
        q = to_amplitudes(SimplexPoint([0.5, 0.0, 0.5, 0.0])).q
        np.testing.assert_allclose(q, [np.sqrt(2.0), 0.0, np.sqrt(2.0), 0.0])

    def test_signs(self):
        q = to_amplitudes(SimplexPoint([0.25] * 4), signs=[1, -1, 1, -1]).q
        np.testing.assert_allclose(q, [1.0, -1.0, 1.0, -1.0])
        with pytest.raises(InvalidArgumentError):
            to_amplitudes(SimplexPoint([0.25] * 4), signs=[1, 0, 1, 1])

    def test_sphere_and_round_trip(self):
        rng = np.random.default_rng(3)
        for aleph in (2, 4, 7):
            for _ in range(50):
                p = rng.dirichlet(np.ones(aleph))
                amplitude_point = to_amplitudes(SimplexPoint(p))
                assert abs(np.sum(amplitude_point.q ** 2) - 4.0) < 1e-12
                np.testing.assert_allclose(amplitude_point.to_probabilities(), p, atol=1e-15)

    def test_off_sphere(self):
        with pytest.raises(InvalidArgumentError):
            AmplitudePoint([1.0, 1.0])

    def test_lambda_space_identity(self):
        rng = np.random.default_rng(4)
        for _ in range(20):
            point = SimplexPoint(rng.dirichlet(np.ones(4)))
            np.testing.assert_array_equal(metric_on_lambda_space(point), simplex_metric(point))
        np.testing.assert_array_equal(metric_on_lambda_space(SimplexPoint([0.25] * 4)), np.diag([4.0] * 4))

    def test_lambda_space_boundary(self):
        with pytest.raises(BoundaryError):
            metric_on_lambda_space(SimplexPoint([0.5, 0.5, 0.0, 0.0]))


class TestInducedMetric:

    def test_epr_amplitude_form(self, spin_half):
        assert induced_metric(epr_curve(spin_half), 1.0, InducedForm.AMPLITUDE) == pytest.approx(1.0, abs=1e-14)

    def test_epr_ratio_form(self, spin_one):
        assert induced_metric(epr_curve(spin_one), 0.6, InducedForm.RATIO) == pytest.approx(4.0, abs=1e-6)

    def test_binomial(self):
        assert induced_metric(binomial_curve(), np.pi / 4, InducedForm.AMPLITUDE) == pytest.approx(4.0)
        assert induced_metric(binomial_curve(), np.pi / 4, InducedForm.LOG) == pytest.approx(4.0)

    @pytest.mark.parametrize("mode", [DerivativeMode.CLOSED_FORM, DerivativeMode.FINITE_DIFFERENCE])
    def test_three_forms_agree(self, model, mode):
        curve = epr_curve(model, mode, 1e-4)
        # every cell keeps P > 0.04 on this range
        for theta in np.linspace(0.6, 2.5, 9) / abs(model.n):
            log = induced_metric(curve, theta, InducedForm.LOG)
            ratio = induced_metric(curve, theta, InducedForm.RATIO)
            amp = induced_metric(curve, theta, InducedForm.AMPLITUDE)
            assert abs(log - ratio) < 1e-6
            assert abs(ratio - amp) < 1e-6
            assert amp == pytest.approx(model.n ** 2, abs=1e-6)

    def test_boundary_cell_named(self, spin_half):
        with pytest.raises(BoundaryError) as info:
            induced_metric(epr_curve(spin_half), 0.0, InducedForm.RATIO)
        assert info.value.cell == Outcome.PP
        assert "++" in str(info.value)

    def test_amplitude_form_at_boundary(self, spin_half):
        assert induced_metric(epr_curve(spin_half), 0.0, InducedForm.AMPLITUDE) == pytest.approx(1.0)

    def test_lambda_composition(self, model):
        curve = epr_curve(model)
        theta = 0.5 / abs(model.n)
        dp = curve.d_probabilities(theta)
        g_lambda = dp @ metric_on_lambda_space(curve.point(theta)) @ dp
        assert g_lambda == pytest.approx(model.n ** 2, abs=1e-10)

    def test_closed_form_needs_derivatives(self):
        with pytest.raises(InvalidArgumentError):
            CurveOnSimplex(lambda t: np.array([0.5, 0.5]), derivative_mode=DerivativeMode.CLOSED_FORM)

    def test_generic_curve_finite_differences(self):
        # P = ((1 + t) / 3, (2 - t) / 3) has Fisher information 1 / ((1 + t)(2 - t))
        curve = CurveOnSimplex(lambda t: np.array([(1.0 + t) / 3.0, (2.0 - t) / 3.0]))
        for form in (InducedForm.LOG, InducedForm.RATIO, InducedForm.AMPLITUDE):
            assert induced_metric(curve, 0.5, form) == pytest.approx(1.0 / (1.5 * 1.5), abs=1e-8)


class TestConstancyScan:

    def test_epr(self, model):
        lo, hi = metric_constancy_scan(epr_curve(model), 512)
        assert hi - lo < 1e-8
        assert lo == pytest.approx(model.n ** 2, abs=1e-8)

    def test_binomial(self):
        lo, hi = metric_constancy_scan(binomial_curve(), 512)
        assert lo == pytest.approx(4.0, abs=1e-12)
        assert hi == pytest.approx(4.0, abs=1e-12)

    def test_ratio_form_hits_boundary(self, spin_half):
        with pytest.raises(BoundaryError):
            metric_constancy_scan(epr_curve(spin_half), 512, InducedForm.RATIO)

    def test_module_scan(self, spin_one):
        module = GEO_Simplex()
        module.scan_points = 64
        result = module.scan(spin_one)
        assert len(result["rows"]) == 64
        assert result["spread"] < 1e-8
        assert result["expected"] == 4.0
