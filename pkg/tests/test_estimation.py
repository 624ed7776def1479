"""Outer samples, angle estimators and Monte Carlo bound checks.

Monte Carlo assertions state their slack in standard errors. The
acceptance scale runs (M = 10**4 with 10**4 replications, M = 1 with
10**5 replications) are marked slow.
"""

import numpy as np
import pytest

from modbase import *
from model import Outcome, SpinModel, joint_distribution
from estimation import *


def _sample(counts, n=1):
    return OuterSample(counts, model=SpinModel(n))


class TestSampling:

    def test_zero_cells(self, spin_half):
        outer = sample(0.0, spin_half, 1000, seed=3)
        assert outer.counts[Outcome.PP] == 0
        assert outer.counts[Outcome.MM] == 0
        assert outer.M == 1000

    def test_frequencies_near_probabilities(self, spin_half):
        outer = sample(np.pi / 2, spin_half, 10 ** 6, seed=42)
        # binomial sigma 4.3e-4, 0.002 is about 4.6 sigma
        np.testing.assert_allclose(frequencies(outer).lambda_hat, 0.25, atol=0.002)

    def test_deterministic(self, spin_one):
        a = sample(0.7, spin_one, 5000, seed=7)
        b = sample(0.7, spin_one, 5000, seed=7)
        np.testing.assert_array_equal(a.counts, b.counts)
        c = sample(0.7, spin_one, 5000, seed=8)
        assert not np.array_equal(a.counts, c.counts)

    @pytest.mark.parametrize("M", [0, -5, 2.5])
    def test_invalid_size(self, spin_half, M):
        with pytest.raises(InvalidArgumentError):
            sample(1.0, spin_half, M, seed=1)

    def test_invalid_seed(self, spin_half):
        with pytest.raises(InvalidArgumentError):
            sample(1.0, spin_half, 10, seed=-1)

    def test_invalid_counts(self):
        with pytest.raises(InvalidArgumentError):
            OuterSample([0, 0, 0, 0])
        with pytest.raises(InvalidArgumentError):
            OuterSample([1, -1, 3, 0])

    def test_frequencies(self):
        np.testing.assert_allclose(frequencies(_sample([0, 0, 500, 500])).lambda_hat, [0.0, 0.0, 0.5, 0.5])
        np.testing.assert_allclose(frequencies(_sample([250] * 4)).lambda_hat, [0.25] * 4)

    def test_frequency_sum(self):
        freq = frequencies(_sample([1, 1, 1, 4]))
        assert abs(freq.lambda_hat.sum() - 1.0) <= 1e-15

    def test_frequencies_unbiased(self, spin_one):
        M, R = 100, 2000
        counts = replicate_counts(0.5, spin_one, M, R, seed=11)
        p = joint_distribution(0.5, spin_one).p
        mean = counts.mean(axis=0) / M
        # 4 standard errors per cell
        np.testing.assert_array_less(np.abs(mean - p), 4.0 * np.sqrt(p * (1.0 - p) / (M * R)))

    def test_replications_independent_of_workers(self, spin_half):
        single = replicate_counts(1.0, spin_half, 200, 64, seed=5, workers=1)
        threaded = replicate_counts(1.0, spin_half, 200, 64, seed=5, workers=4)
        np.testing.assert_array_equal(single, threaded)

    def test_replication_stream(self, spin_half):
        counts = replicate_counts(1.0, spin_half, 300, 3, seed=5)
        np.testing.assert_array_equal(counts[2], sample(1.0, spin_half, 300, seed=5, stream=3).counts)


class TestEstimators:

    @pytest.mark.parametrize("lam, cell, n, expected", [
        (0.5, Outcome.PP, 1, np.pi),
        (0.25, Outcome.PP, 1, np.pi / 2),
        (0.25, Outcome.PM, 2, np.pi / 4),
    ])
    def test_estimate_cell(self, lam, cell, n, expected):
        rest = (1.0 - lam) / 3.0
        freq = FrequencyVector([lam if c == cell else rest for c in Outcome.All])
        assert estimate_cell(freq, cell, SpinModel(n)) == pytest.approx(expected, abs=1e-15)

    def test_clamping(self, spin_half):
        freq = FrequencyVector([0.7, 0.1, 0.1, 0.1])
        assert estimate_cell(freq, Outcome.PP, spin_half) == pytest.approx(np.pi)
        freq = FrequencyVector([0.1, 0.1, 0.7, 0.1])
        assert estimate_cell(freq, Outcome.PM, spin_half) == 0.0

    def test_branch_consistency(self, model):
        lo, hi = principal_branch(model)
        for theta in np.linspace(lo + 0.02, hi - 0.02, 100):
            freq = FrequencyVector(joint_distribution(theta, model).p)
            for cell in Outcome.All:
                assert abs(estimate_cell(freq, cell, model) - theta) < 1e-12

    @pytest.mark.parametrize("counts, n, expected", [
        ([0, 0, 500, 500], 1, 0.0),
        ([500, 500, 0, 0], 1, np.pi),
        ([250, 250, 250, 250], 2, np.pi / 4),
    ])
    def test_estimate_mle(self, counts, n, expected):
        assert estimate_mle(_sample(counts, n)) == pytest.approx(expected, abs=1e-15)

    def test_mle_maximizes_likelihood(self):
        outer = _sample([250, 250, 250, 250], 2)
        grid = np.linspace(0.01, np.pi / 2 - 0.01, 2001)
        best = grid[np.argmax([log_likelihood(outer, t) for t in grid])]
        assert abs(best - estimate_mle(outer)) < 1e-3

    def test_estimate_dispatch(self):
        outer = _sample([100, 120, 380, 400], 1)
        assert estimate(outer, EstimatorKind.POOLED_MLE) == estimate_mle(outer)
        assert estimate(outer, EstimatorKind.CELL_MP) == estimate_cell(frequencies(outer), Outcome.MP, outer.model)

    def test_parse_kind(self):
        assert EstimatorKind.parse("MLE") == EstimatorKind.POOLED_MLE
        assert EstimatorKind.parse("pm") == EstimatorKind.CELL_PM
        with pytest.raises(InvalidArgumentError):
            EstimatorKind.parse("median")


class TestLikelihood:

    def test_zero_probability_cell(self):
        assert log_likelihood(_sample([1, 0, 2, 2]), 0.0) == -np.inf

    def test_uncounted_zero_cell(self):
        assert np.isfinite(log_likelihood(_sample([0, 0, 2, 2]), 0.0))

    def test_score_vanishes_at_mle(self):
        outer = _sample([130, 100, 380, 390], 1)
        theta = estimate_mle(outer)
        assert abs(score(outer, theta)) < 1e-9 * outer.M

    def test_score_is_derivative(self):
        outer = _sample([30, 40, 10, 20], 2)
        h = 1e-6
        numeric = (log_likelihood(outer, 0.9 + h) - log_likelihood(outer, 0.9 - h)) / (2 * h)
        assert score(outer, 0.9) == pytest.approx(numeric, rel=1e-6)

    @pytest.mark.parametrize("n", [1, -1, 2])
    def test_numeric_mle(self, n):
        outer = sample(0.6, SpinModel(n), 2000, seed=21)
        assert abs(estimate_mle_numeric(outer) - estimate_mle(outer)) < 1e-6


class TestBounds:

    def test_lrcb(self):
        assert lrcb(1, SpinModel(1)) == 1.0
        assert lrcb(100, SpinModel(2)) == pytest.approx(0.0025)
        assert lrcb(4, SpinModel(2)) == lrcb(16, SpinModel(1))

    def test_lrcb_invalid(self, spin_half):
        with pytest.raises(InvalidArgumentError):
            lrcb(0, spin_half)

    def test_delta_variance_symmetric_point(self, spin_half):
        M = 10000
        assert delta_variance_cell(np.pi / 2, spin_half, M, Outcome.PP) == pytest.approx(3.0 / M)
        assert delta_variance_cell(np.pi / 2, spin_half, M, Outcome.PM) == pytest.approx(3.0 / M)

    def test_delta_variance_above_bound(self, model):
        lo, hi = principal_branch(model)
        for theta in np.linspace(lo, hi, 23)[1:-1]:
            for cell in Outcome.All:
                assert delta_variance_cell(theta, model, 50, cell) >= lrcb(50, model)

    @pytest.mark.parametrize("theta", [0.0, np.pi, 4.0])
    def test_delta_variance_endpoint(self, spin_half, theta):
        with pytest.raises(SingularBranchError):
            delta_variance_cell(theta, spin_half, 100, Outcome.PP)


class TestExperiments:

    def test_pooled_mle(self, spin_half):
        R = 400
        result = unbiasedness_experiment(1.0, spin_half, 1000, R, seed=3)
        assert abs(result.bias) < 4.0 * np.sqrt(result.variance / R)
        # sampling error of the variance sqrt(2 / R) = 7%, 4 sigma
        assert abs(result.variance / result.lrcb - 1.0) < 0.3
        assert result.lrcb == 1e-3
        assert result.replications == R

    def test_ordering(self, spin_one):
        pooled = unbiasedness_experiment(0.5, spin_one, 1000, 400, seed=9)
        for kind in (EstimatorKind.CELL_PP, EstimatorKind.CELL_MM, EstimatorKind.CELL_PM, EstimatorKind.CELL_MP):
            cell = unbiasedness_experiment(0.5, spin_one, 1000, 400, seed=9, estimator=kind)
            assert cell.variance >= pooled.variance

    def test_too_few_replications(self, spin_half):
        with pytest.raises(InvalidArgumentError):
            unbiasedness_experiment(1.0, spin_half, 100, 99, seed=1)

    def test_endpoint(self, spin_half):
        with pytest.raises(SingularBranchError):
            unbiasedness_experiment(0.0, spin_half, 100, 100, seed=1)

    def test_rcf_degenerate(self, spin_half):
        with pytest.raises(SingularBranchError):
            rcf_inequality_report(0.0, spin_half, 100, 1000, seed=1)

    def test_rcf_near_bound(self, spin_half):
        report = rcf_inequality_report(1.0, spin_half, 100, 2000, seed=2)
        assert report.bound == pytest.approx(0.01)
        # variance sampling error sqrt(2 / R) = 3.2%
        assert abs(report.sigma2_IF / report.bound - 1.0) < 0.15

    def test_rcf_single_draw(self, spin_one):
        # sigma**2 I_F is about 2.04 for n = 2 at theta = 1
        report = rcf_inequality_report(1.0, spin_one, 1, 5000, seed=2)
        assert report.bound == 1.0
        assert report.holds
        assert report.sigma2_IF > 1.5

    def test_local_unbiasedness(self, spin_half):
        slope = local_unbiasedness_slope(1.0, spin_half, 10000, 500, seed=4)
        assert slope == pytest.approx(1.0, abs=0.05)

    def test_workers_do_not_change_result(self, spin_half):
        a = unbiasedness_experiment(1.0, spin_half, 500, 200, seed=6, workers=1)
        b = unbiasedness_experiment(1.0, spin_half, 500, 200, seed=6, workers=3)
        assert a == b


class TestReport:

    def test_pooled(self, spin_half):
        outer = sample(1.0, spin_half, 10000, seed=7)
        report = estimation_report(outer)
        assert report.std_error == pytest.approx(0.01)
        assert report.lrcb == pytest.approx(1e-4)
        assert report.ci_low <= report.theta_hat <= report.ci_high
        # 1.96 standard errors each side
        assert report.ci_high - report.ci_low == pytest.approx(2 * 1.959963984540054 * 0.01, rel=1e-9)
        assert abs(report.theta_hat - 1.0) < 3.0 * np.sqrt(report.lrcb)

    def test_cell_standard_error(self, spin_half):
        outer = sample(1.0, spin_half, 10000, seed=7)
        report = estimation_report(outer, EstimatorKind.CELL_PP)
        expected = np.sqrt(delta_variance_cell(report.theta_hat, spin_half, 10000, Outcome.PP))
        assert report.std_error == pytest.approx(expected)

    def test_endpoint_estimate(self, spin_half):
        report = estimation_report(_sample([0, 0, 500, 500]), EstimatorKind.CELL_PM)
        assert report.theta_hat == 0.0
        assert report.std_error == np.inf
        assert (report.ci_low, report.ci_high) == (0.0, np.pi)

    def test_interval_clipped(self):
        report = estimation_report(_sample([0, 0, 5, 5]))
        assert report.ci_low == 0.0

    def test_confidence_range(self, spin_half):
        with pytest.raises(InvalidArgumentError):
            estimation_report(_sample([1, 1, 1, 1]), confidence=1.0)

    def test_as_dict(self):
        d = estimation_report(_sample([10, 10, 40, 40]), EstimatorKind.CELL_MM, 0.9).as_dict()
        assert d["estimator"] == "mm"
        assert d["confidence"] == 0.9
        assert d["M"] == 100


class TestEstimationModule:

    def test_estimate_all(self, spin_half):
        module = EST_Angle()
        module.samples = 2000
        log = EventLog()
        module.add_receiver(log)
        outer, reports = module.estimate(1.0, spin_half)
        assert outer.M == 2000
        assert [r.estimator_kind for r in reports] == list(EstimatorKind.All)
        assert sum(1 for e in log.logFifo if e.type == EventType.STATUS) == 5

    def test_configured_seed(self, spin_half):
        module = EST_Angle()
        module.seed = 99
        module.samples = 100
        np.testing.assert_array_equal(module.simulate(1.0, spin_half).counts,
                                      sample(1.0, spin_half, 100, seed=99).counts)


@pytest.mark.slow
class TestAcceptanceScale:

    @pytest.mark.parametrize("n, expected", [(1, 1e-4), (2, 2.5e-5)])
    def test_pooled_attains_bound(self, n, expected):
        R = 10000
        result = unbiasedness_experiment(1.0, SpinModel(n), 10000, R, seed=7)
        assert abs(result.bias) < 3.0 * np.sqrt(result.variance / R)
        assert result.lrcb == pytest.approx(expected)
        assert abs(result.variance / expected - 1.0) < 0.1

    def test_cell_estimator_delta_oracle(self, spin_half):
        result = unbiasedness_experiment(np.pi / 2, spin_half, 10000, 10000, seed=7,
                                         estimator=EstimatorKind.CELL_PP)
        assert abs(result.variance / 3e-4 - 1.0) < 0.1
        assert result.variance >= result.lrcb

    @pytest.mark.parametrize("n", [1, 2])
    def test_single_draw_bound(self, n):
        report = rcf_inequality_report(1.0, SpinModel(n), 1, 100000, seed=7)
        assert report.bound == 1.0
        assert report.holds
