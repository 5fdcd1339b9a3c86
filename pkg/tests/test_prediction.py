import numpy as np
import pytest

from record_edge.evd import ModelParams, cdf, quantile
from record_edge.ingest import parse_time
from record_edge.prediction import (
    VolumeModel,
    best_of_season_cdf,
    default_time_grid,
    prediction_curve,
    prob_break,
)

PAPER = ModelParams(0.208, 2.609)
THRESHOLD = 370.0
ENDPOINT = 2.609 / 0.208

# frozen from a 50-digit evaluation of the Poisson-volume formula
P_WORLD_RECORD = 0.109620330841  # target 6:01.56, lambda 25
P_SIX_MINUTE = 0.0115769625162   # target 6:00.00, lambda 25
P_604 = 0.665287763175           # target 6:04.00, lambda 25


class TestBestOfSeasonCdf:
    def test_beyond_endpoint_is_certain(self, vol25):
        assert best_of_season_cdf(PAPER, vol25, ENDPOINT) == 1.0
        assert best_of_season_cdf(PAPER, vol25, ENDPOINT + 1) == 1.0

    def test_at_zero_all_races_beat_it(self, vol25):
        assert best_of_season_cdf(PAPER, vol25, 0.0) == pytest.approx(np.exp(-25.0), rel=1e-12)

    def test_single_race_reduces_to_cdf(self):
        one = VolumeModel.fixed(1)
        assert best_of_season_cdf(PAPER, one, 5.0) == pytest.approx(cdf(PAPER, 5.0), rel=1e-12)

    def test_fixed_count_matches_poisson_for_large_volume(self, vol25):
        fixed = VolumeModel.fixed(25)
        p_pois = 1 - best_of_season_cdf(PAPER, vol25, 8.44)
        p_fix = 1 - best_of_season_cdf(PAPER, fixed, 8.44)
        assert p_fix == pytest.approx(p_pois, rel=0.02)


class TestProbBreak:
    def test_world_record_anchor(self, vol25):
        p = prob_break(PAPER, vol25, parse_time("6:01.56"), THRESHOLD)
        assert p == pytest.approx(P_WORLD_RECORD, abs=1e-9)
        assert p == pytest.approx(0.109, abs=0.001)

    def test_six_minute_anchor(self, vol25):
        p = prob_break(PAPER, vol25, parse_time("6:00.00"), THRESHOLD)
        assert p == pytest.approx(P_SIX_MINUTE, abs=1e-9)
        assert p == pytest.approx(0.012, abs=0.001)

    def test_beyond_endpoint_time_impossible(self, vol25):
        below_limit = THRESHOLD - ENDPOINT - 0.5
        assert prob_break(PAPER, vol25, below_limit, THRESHOLD) == 0.0

    def test_target_must_beat_threshold(self, vol25):
        with pytest.raises(ValueError):
            prob_break(PAPER, vol25, THRESHOLD, THRESHOLD)
        with pytest.raises(ValueError):
            prob_break(PAPER, vol25, THRESHOLD + 1, THRESHOLD)

    def test_monte_carlo_agreement(self, vol25):
        # simulate whole seasons and compare the empirical break frequency
        rng = np.random.default_rng(99)
        reps = 100_000
        target_y = 8.44
        counts = rng.poisson(25.0, size=reps)
        hits = 0
        for n, block in zip(*np.unique(counts, return_counts=True)):
            if n == 0:
                continue
            u = rng.uniform(size=(int(block), int(n)))
            best = quantile(PAPER, u).max(axis=1)
            hits += int(np.sum(best > target_y))
        p_hat = hits / reps
        p = 1 - best_of_season_cdf(PAPER, vol25, target_y)
        se = np.sqrt(p * (1 - p) / reps)
        assert abs(p_hat - p) < 3 * se


class TestPredictionCurve:
    def test_paper_grid_anchors(self, vol25):
        curve = prediction_curve(
            PAPER, vol25, THRESHOLD, [parse_time("6:01.56"), parse_time("6:00.00")]
        )
        np.testing.assert_allclose(
            curve.probabilities, [P_SIX_MINUTE, P_WORLD_RECORD], atol=1e-9
        )
        np.testing.assert_allclose(curve.probabilities, [0.012, 0.109], atol=0.001)

    def test_just_below_threshold(self, vol25):
        curve = prediction_curve(PAPER, vol25, THRESHOLD, [THRESHOLD - 1e-6])
        assert curve.probabilities[0] == pytest.approx(1 - np.exp(-25.0), abs=1e-4)

    def test_six_oh_four_neighbourhood(self, vol25):
        # the Poisson formula puts 6:04 at 0.665, with the 50 percent
        # crossing between 6:03 and 6:04
        assert prob_break(PAPER, vol25, parse_time("6:04.00"), THRESHOLD) == pytest.approx(
            P_604, abs=1e-9
        )
        assert prob_break(PAPER, vol25, parse_time("6:03.00"), THRESHOLD) < 0.5 < P_604

    def test_monotone_in_target(self, vol25):
        grid = default_time_grid(PAPER, THRESHOLD)
        curve = prediction_curve(PAPER, vol25, THRESHOLD, grid)
        assert np.all(np.diff(curve.probabilities) >= 0)
        assert np.all((curve.probabilities >= 0) & (curve.probabilities <= 1))
        assert np.all(np.diff(curve.times) > 0)

    def test_empty_grid(self, vol25):
        with pytest.raises(ValueError):
            prediction_curve(PAPER, vol25, THRESHOLD, [])

    def test_grid_must_beat_threshold(self, vol25):
        with pytest.raises(ValueError):
            prediction_curve(PAPER, vol25, THRESHOLD, [THRESHOLD])


class TestDefaultTimeGrid:
    def test_spans_threshold_down_to_endpoint(self):
        grid = default_time_grid(PAPER, THRESHOLD)
        assert grid.max() == pytest.approx(THRESHOLD - 0.01, abs=1e-9)
        assert grid.min() >= THRESHOLD - ENDPOINT - 1e-9
        steps = np.diff(grid)
        np.testing.assert_allclose(steps, 0.01, atol=1e-9)

    def test_unbounded_support_reaches_fifteen_seconds(self):
        grid = default_time_grid(ModelParams(0.0, 2.0), THRESHOLD)
        assert grid.min() == pytest.approx(THRESHOLD - 15.0, abs=0.011)


class TestVolumeModel:
    def test_exactly_one_field(self):
        with pytest.raises(ValueError):
            VolumeModel(lam=25.0, fixed_n=10)
        with pytest.raises(ValueError):
            VolumeModel()

    def test_positivity(self):
        with pytest.raises(ValueError):
            VolumeModel.poisson(0.0)
        with pytest.raises(ValueError):
            VolumeModel.fixed(0)
