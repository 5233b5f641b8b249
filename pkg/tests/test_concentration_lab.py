"""
Unit tests for the concentration experiments.

Sample sizes are kept small; statistical assertions allow several
standard errors. Full-size runs live in test_acceptance.py.
"""

import math
import sys
from pathlib import Path as FilePath

import numpy as np
import pytest

# Add src to path for imports
sys.path.insert(0, str(FilePath(__file__).parent.parent))

from config.settings import TAIL_EXPONENT_TOLERANCE
from src.algebra.tensor_algebra import WeightScheme
from src.exceptions import DomainError
from src.experiments.concentration_lab import (
    analytic_second_moment,
    bch_lipschitz_probe,
    derived_ou_area,
    estimate_coordinate_moments,
    expected_alpha_range,
    hypercontractivity_ratio,
    levy_area,
    mean_concentration_experiment,
    moment_ladder,
    norm_samples,
    norm_tail_experiment,
    optimal_weights,
    ou_area_experiment,
    published_ou_area,
    scaling_experiment,
    small_ball_curve,
    tail_experiment,
)
from src.experiments.feature_pipeline import (
    FeatureKind,
    coordinate_samples,
    feature_dimension,
    levy_area_samples,
)
from src.signature.signature_engine import Path
from src.simulation.gaussian_simulator import GaussianModel, GaussianSimulator, OUStart, SampleGrid
from src.simulation.seeding import SeedSpec


@pytest.fixture
def gaussian_samples():
    return np.random.default_rng(2024).standard_normal(20000)


class TestLevyArea:
    """Deterministic areas."""

    def test_axis_path(self):
        path = Path([0.0, 1.0, 2.0], [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]])
        assert levy_area(path) == pytest.approx(0.5)
        assert levy_area(path, 2, 1) == pytest.approx(-0.5)

    def test_unit_square_loop(self):
        loop = Path(
            [0.0, 0.5, 1.0, 1.5, 2.0],
            [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.0, 0.0]],
        )
        assert levy_area(loop) == pytest.approx(1.0)

    def test_invalid_letters(self):
        path = Path([0.0, 1.0], [[0.0, 0.0], [1.0, 1.0]])
        with pytest.raises(DomainError):
            levy_area(path, 1, 1)
        with pytest.raises(DomainError):
            levy_area(path, 1, 3)


class TestMoments:
    """Second moments against closed forms."""

    def test_analytic_references(self):
        brownian = GaussianModel.brownian(d=3)
        assert analytic_second_moment(brownian, "12", 1.0)[0] == pytest.approx(0.5)
        assert analytic_second_moment(brownian, "123", 2.0)[0] == pytest.approx(8.0 / 6.0)
        assert analytic_second_moment(brownian, "11", 1.0) == (None, None)
        fbm = GaussianModel.fbm(0.75)
        assert analytic_second_moment(fbm, "1", 2.0)[0] == pytest.approx(2.0 ** 1.5)
        ou = GaussianModel.ou(1.0)
        assert analytic_second_moment(ou, "1", 1.0)[0] == pytest.approx((1.0 - math.exp(-2.0)) / 2.0)

    def test_brownian_double_integral(self):
        report = estimate_coordinate_moments(
            GaussianModel.brownian(d=2), "12", SampleGrid(64, 1.0), 4000, SeedSpec(1)
        )
        assert report.reference == 0.5
        assert report.sample_count == 4000
        assert abs(report.second_moment - 0.5) < 5 * report.second_moment_se + 0.01
        assert report.fourth_moment > report.second_moment ** 2
        assert report.to_dict()["word"] == "12"
        print(f"✓ E[S12^2] = {report.second_moment:.4f} ± {report.second_moment_se:.4f}")

    def test_repeated_letter_is_a_power(self):
        """S_22 = (X^2_T)^2 / 2 for any path starting at 0."""
        model = GaussianModel.brownian(d=2)
        grid = SampleGrid(16, 1.0)
        samples = coordinate_samples(model, grid, "22", 200, SeedSpec(3))
        values = GaussianSimulator(model, grid).sample(200, SeedSpec(3))
        np.testing.assert_allclose(samples, 0.5 * values[:, -1, 1] ** 2, rtol=1e-10, atol=1e-14)

    def test_validation(self):
        model = GaussianModel.brownian(d=2)
        with pytest.raises(DomainError):
            estimate_coordinate_moments(model, "12", SampleGrid(8), 50, SeedSpec(1))
        with pytest.raises(DomainError):
            estimate_coordinate_moments(model, "12", SampleGrid(8), 200, SeedSpec(1), m=1)
        with pytest.raises(DomainError):
            coordinate_samples(model, SampleGrid(8), "13", 10, SeedSpec(1))


class TestTails:
    """Exponent fits on tail curves."""

    def test_expected_range(self):
        """Test the window is 2/k plus or minus an absolute tolerance."""
        assert expected_alpha_range(1, TAIL_EXPONENT_TOLERANCE) == pytest.approx((1.8, 2.2))
        assert expected_alpha_range(2, TAIL_EXPONENT_TOLERANCE) == pytest.approx((0.8, 1.2))
        assert expected_alpha_range(4, 0.1) == pytest.approx((0.4, 0.6))

    def test_prefactor_biased_fit_is_rejected(self):
        """A Gaussian double-log estimate near 1.64 falls outside the level-1 window."""
        low, high = expected_alpha_range(1, TAIL_EXPONENT_TOLERANCE)
        assert not low <= 1.6416 <= high
        assert low <= 2.108 <= high

    def test_gaussian_tail(self):
        samples = np.random.default_rng(7).standard_normal(100000)
        report = tail_experiment(samples, k=1, label="N(0,1)")
        assert report.expected_alpha == 2.0
        assert report.expected_range == pytest.approx((1.8, 2.2))
        assert 1.5 < report.fit.alpha_hat < 2.2
        assert report.fit.method == "double_log"
        assert report.to_dict()["label"] == "N(0,1)"

    def test_profile_method_is_passed_through(self):
        samples = np.random.default_rng(7).standard_normal(100000)
        report = tail_experiment(samples, k=1, label="N(0,1)", method="profile")
        assert report.fit.method == "profile"
        assert report.fit.prefactor > 0

    def test_level_validation(self, gaussian_samples):
        with pytest.raises(DomainError):
            tail_experiment(gaussian_samples, k=0)


class TestHypercontractivity:
    """Moment ratios against (p-1)^{k/2}."""

    def test_gaussian_ratio(self, gaussian_samples):
        result = hypercontractivity_ratio(gaussian_samples, k=1, p=4, seed=SeedSpec(1), resamples=50)
        assert result.ratio == pytest.approx(3.0 ** 0.25, abs=0.03)
        assert result.bound == pytest.approx(math.sqrt(3.0))
        assert result.passed
        assert result.std_err > 0

    def test_ladder(self, gaussian_samples):
        ladder = moment_ladder(gaussian_samples, k=1, p_values=(3, 4, 6), resamples=20)
        assert [r.p for r in ladder] == [3.0, 4.0, 6.0]
        ratios = [r.ratio for r in ladder]
        assert ratios == sorted(ratios)
        assert all(r.passed for r in ladder)

    def test_validation(self, gaussian_samples):
        with pytest.raises(DomainError):
            hypercontractivity_ratio(gaussian_samples, k=1, p=1.5)
        with pytest.raises(DomainError):
            hypercontractivity_ratio(gaussian_samples[:5000], k=1)
        with pytest.raises(DomainError, match="zero L2 norm"):
            hypercontractivity_ratio(np.zeros(20000), k=1)


class TestSmallBall:
    """Small-ball probabilities."""

    def test_gaussian_small_balls(self, gaussian_samples):
        table = small_ball_curve(gaussian_samples, [0.01, 0.1, 1.0], k=1)
        assert table.constant == 2.0
        assert table.sample_count == 20000
        probabilities = [p.probability for p in table.points]
        assert probabilities[0] == pytest.approx(0.008, abs=0.004)
        assert probabilities[2] == pytest.approx(0.683, abs=0.02)
        assert table.passed

    def test_epsilon_range(self, gaussian_samples):
        with pytest.raises(DomainError):
            small_ball_curve(gaussian_samples, [0.0], k=1)
        with pytest.raises(DomainError):
            small_ball_curve(gaussian_samples, [1.5], k=1)

    def test_optimal_weights(self):
        np.testing.assert_allclose(optimal_weights(2, 4.0), [1.0, 0.5, 0.125])
        with pytest.raises(DomainError):
            optimal_weights(0, 1.0)


class TestMeanConcentration:
    """Deviation of sample means from a reference mean."""

    ARGS = dict(
        model=GaussianModel.brownian(d=2),
        grid=SampleGrid(16, 1.0),
        m=2,
        weights=WeightScheme.factorial(),
        n_grid=[16, 64, 256],
        reps=8,
        n_ref=2560,
    )

    def test_signature_slope(self):
        curve = mean_concentration_experiment(
            feature=FeatureKind.SIGNATURE, seed=SeedSpec(8), **self.ARGS
        )
        assert curve.feature_dimension == 6
        assert list(curve.n_values) == [16, 64, 256]
        assert -0.85 < curve.slope_hat < -0.25
        assert curve.deviations[0] > curve.deviations[-1]
        assert curve.reference_error > 0

    def test_log_signature_features(self):
        curve = mean_concentration_experiment(
            feature="log-signature", seed=SeedSpec(9), **self.ARGS
        )
        assert curve.feature is FeatureKind.LOG_SIGNATURE
        assert curve.feature_dimension == feature_dimension(FeatureKind.LOG_SIGNATURE, 2, 2) == 3
        assert curve.to_dict()["feature"] == "log-signature"

    def test_worker_count_does_not_matter(self):
        serial = mean_concentration_experiment(
            feature=FeatureKind.SIGNATURE, seed=SeedSpec(5), workers=1, chunk_size=50, **self.ARGS
        )
        threaded = mean_concentration_experiment(
            feature=FeatureKind.SIGNATURE, seed=SeedSpec(5), workers=3, chunk_size=50, **self.ARGS
        )
        np.testing.assert_array_equal(serial.deviations, threaded.deviations)

    def test_validation(self):
        args = dict(self.ARGS)
        with pytest.raises(DomainError, match="n_ref"):
            mean_concentration_experiment(
                feature="signature", seed=SeedSpec(1), **{**args, "n_ref": 1000}
            )
        with pytest.raises(DomainError, match="strictly increasing"):
            mean_concentration_experiment(
                feature="signature", seed=SeedSpec(1), **{**args, "n_grid": [64, 16]}
            )
        with pytest.raises(DomainError, match="reps"):
            mean_concentration_experiment(
                feature="signature", seed=SeedSpec(1), **{**args, "reps": 0}
            )


class TestBCHProbe:
    """Lipschitz growth of the truncated logarithm."""

    def test_level_two_probe(self):
        report = bch_lipschitz_probe(2, 2, [1.5, 2.0, 3.0], pairs=100, seed=SeedSpec(10))
        assert report.slope_bound == 1.5
        assert len(report.radii) == 3
        for radius in report.radii:
            assert radius.pairs_used + radius.pairs_skipped == 100
            assert radius.max_ratio >= radius.mean_ratio > 0
        assert report.slope is not None
        assert report.passed

    def test_reproducible(self):
        first = bch_lipschitz_probe(2, 3, [1.5, 2.5], pairs=100, seed=SeedSpec(3))
        second = bch_lipschitz_probe(2, 3, [1.5, 2.5], pairs=100, seed=SeedSpec(3))
        assert first.to_dict() == second.to_dict()

    def test_validation(self):
        with pytest.raises(DomainError):
            bch_lipschitz_probe(2, 2, [1.5], pairs=50, seed=SeedSpec(1))
        with pytest.raises(DomainError):
            bch_lipschitz_probe(2, 2, [2.0, 1.5], pairs=100, seed=SeedSpec(1))


class TestScaling:
    """Self-similarity of signature moments."""

    def test_fbm_first_level(self):
        report = scaling_experiment(
            GaussianModel.fbm(0.75), "1", [1.0, 2.0], n_steps=32, n_samples=4000, seed=SeedSpec(12)
        )
        assert report.expected_exponent == pytest.approx(1.5)
        assert report.expected_ratio == pytest.approx(2.0 ** 1.5)
        assert abs(report.ratio - report.expected_ratio) < 5 * report.ratio_se

    def test_ou_rejected(self):
        with pytest.raises(DomainError):
            scaling_experiment(GaussianModel.ou(1.0), "1", [1.0, 2.0], 16, 200, SeedSpec(1))


class TestOUArea:
    """OU Lévy area against the two closed forms."""

    def test_closed_forms(self):
        assert published_ou_area(1.0) == pytest.approx(0.032756, abs=1e-6)
        assert derived_ou_area(1.0, 1.0, OUStart.ZERO) == pytest.approx(0.141917, abs=1e-6)
        assert derived_ou_area(1.0, 1.0, OUStart.STATIONARY) == pytest.approx(0.25)

    def test_simulation_matches_derived_form(self):
        model = GaussianModel.ou(1.0, d=2)
        report = ou_area_experiment(
            model, n_steps=64, horizon=1.0, n_samples=2000, seed=SeedSpec(13), refinement_grids=(64, 256)
        )
        assert sorted(report.refinement) == [64, 256]
        assert abs(report.empirical - report.derived) < 5 * report.empirical_se + 0.01
        assert abs(report.extrapolated - report.derived) < 5 * report.extrapolated_se + 0.01
        assert abs(report.empirical - report.published) > 0.05
        assert report.to_dict()["published_closed_form"] == pytest.approx(0.032756, abs=1e-6)

    def test_area_samples_reproducible(self):
        model = GaussianModel.ou(2.0, start="stationary", d=2)
        first = levy_area_samples(model, SampleGrid(16), 100, SeedSpec(4), workers=1)
        second = levy_area_samples(model, SampleGrid(16), 100, SeedSpec(4), workers=2, chunk_size=9)
        np.testing.assert_array_equal(first, second)

    def test_validation(self):
        with pytest.raises(DomainError):
            ou_area_experiment(GaussianModel.brownian(d=2), 16, 1.0, 100, SeedSpec(1))
        with pytest.raises(DomainError):
            ou_area_experiment(GaussianModel.ou(1.0, d=1), 16, 1.0, 100, SeedSpec(1))
        with pytest.raises(DomainError):
            ou_area_experiment(
                GaussianModel.ou(1.0, d=2), 16, 1.0, 100, SeedSpec(1), refinement_grids=(256, 64)
            )


class TestNormTail:
    """Weighted-norm deviations."""

    def test_norm_samples(self):
        model = GaussianModel.brownian(d=2)
        norms = norm_samples(model, SampleGrid(16), 2, WeightScheme.factorial(), 500, SeedSpec(2))
        assert norms.shape == (500,)
        assert np.all(norms > 0)

    def test_signature_norm_tail(self):
        report = norm_tail_experiment(
            GaussianModel.brownian(d=2),
            SampleGrid(32),
            2,
            WeightScheme.factorial(),
            20000,
            SeedSpec(14),
        )
        assert report.curve.label == "||signature||_w - mean (m=2)"
        assert report.k == 2
        assert report.expected_alpha == 1.0
        assert report.curve.sample_count == 20000
        assert report.curve.survival[0] == pytest.approx(0.5, abs=0.02)
        assert np.isfinite(report.fit.alpha_hat) and report.fit.alpha_hat > 0
