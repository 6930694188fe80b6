import numpy as np
import pytest
from numpy.testing import assert_array_equal
from scipy.stats import binom

from rssbag._algae.exceptions import ContractViolation, InfeasibleSampling
from rssbag.data.dataset import Dataset
from rssbag.numerics.rng import RngStream
from rssbag.sampling.sampler import (SamplerConfig, SamplingKind, SamplingPlan, auto_set_size, build_plan,
                                     rss_cycle, select_ranked, srs_sample)
from rssbag.sampling.score import ScoreFunction, fit_score_function


class TestSetSize:

    @pytest.mark.parametrize('n, K', [(1, 1), (3, 1), (4, 2), (2924, 54), (2925, 54), (3025, 55)])
    def test_auto(self, n, K):
        assert auto_set_size(n) == K

    def test_resolve_defaults(self):
        assert SamplerConfig().resolve(30) == (5, 6)
        assert SamplerConfig(K=3, cycles=2).resolve(30) == (3, 2)

    def test_infeasible_rss(self):
        with pytest.raises(InfeasibleSampling):
            SamplerConfig(K=6).resolve(30)

    def test_srs_ignores_feasibility(self):
        assert SamplerConfig(SamplingKind.SRS, K=6).resolve(30) == (6, 5)

    def test_config_round_trip(self):
        config = SamplerConfig('SRS', K=None, cycles=4, seed=9)
        assert SamplerConfig.from_dict(config.to_dict()) == config

    def test_rejects_bad_K(self):
        with pytest.raises(ContractViolation):
            SamplerConfig(K=0)


class TestSelectRanked:

    def test_rth_smallest_of_rth_group(self):
        groups = np.array([[0, 1], [2, 3]])
        scores = np.array([[5.0, 1.0], [0.0, 9.0]])

        assert_array_equal(select_ranked(groups, scores), [1, 3])

    def test_ties_break_by_index(self):
        groups = np.array([[7, 2, 5], [4, 9, 1], [3, 8, 6]])
        scores = np.zeros((3, 3))

        assert_array_equal(select_ranked(groups, scores), [2, 4, 8])


class TestScore:

    def test_correlated_feature_gets_weight(self, binary):
        score = fit_score_function(binary)

        assert score.weights[0] > 0.5
        assert score.weights.shape == (binary.dim,)

    def test_constant_column_gets_zero(self, binary):
        features = np.array(binary.features)
        features[:, 1] = 2.0

        assert fit_score_function(binary.with_features(features)).weights[1] == 0.0

    def test_width_mismatch(self):
        with pytest.raises(ContractViolation):
            ScoreFunction([1.0, 2.0]).apply(np.ones((3, 3)))


class TestPlans:

    def test_rss_cycle_structure(self, binary, rng):
        score = fit_score_function(binary)
        cycle = rss_cycle(np.arange(len(binary)), 4, score, binary, rng)

        assert cycle.indices.size == 4
        assert_array_equal(cycle.ranks, [1, 2, 3, 4])
        assert len(set(cycle.indices.tolist())) == 4

    def test_rss_cycle_needs_k_squared_units(self, binary, rng):
        with pytest.raises(InfeasibleSampling):
            rss_cycle(np.arange(8), 3, fit_score_function(binary), binary, rng)

    def test_rss_plan(self, binary):
        plan = build_plan(SamplerConfig(seed=5), binary, fit_score_function(binary), 1)
        K, m = 6, 6

        assert (plan.K, plan.m, len(plan)) == (K, m, K * m)
        assert plan.indices.min() >= 0 and plan.indices.max() < len(binary)
        assert plan.annotations[:K] == [(0, r, r) for r in range(1, K + 1)]

    def test_plan_depends_only_on_seed_and_id(self, binary):
        score = fit_score_function(binary)
        first = build_plan(SamplerConfig(seed=5), binary, score, 3)

        assert_array_equal(first.indices, build_plan(SamplerConfig(seed=5), binary, score, 3).indices)
        assert not np.array_equal(first.indices, build_plan(SamplerConfig(seed=5), binary, score, 4).indices)

    def test_srs_plan(self, binary):
        plan = build_plan(SamplerConfig(SamplingKind.SRS, seed=2), binary, None, 1)

        assert len(plan) == 6 * 6
        assert plan.annotations == []

    def test_rss_needs_score(self, binary):
        with pytest.raises(ContractViolation):
            build_plan(SamplerConfig(), binary, None, 1)

    def test_plan_serializes(self, binary, tmp_path):
        plan = build_plan(SamplerConfig(seed=1), binary, fit_score_function(binary), 2)
        plan.save(tmp_path / 'plan.json')
        again = SamplingPlan.load(tmp_path / 'plan.json')

        assert_array_equal(again.indices, plan.indices)
        assert again.annotations == plan.annotations

    def test_srs_sample_range(self, rng):
        draws = srs_sample(5, 1000, rng)

        assert draws.min() == 0 and draws.max() == 4

    def test_srs_sample_is_uniform(self):
        n, draws = 4, 100_000
        counts = np.bincount(srs_sample(n, draws, RngStream(31)), minlength=n)
        sigma = np.sqrt(draws * (1.0 / n) * (1.0 - 1.0 / n))

        assert np.all(np.abs(counts - draws / n) <= 3.0 * sigma)

    def test_every_rank_appears_once_per_cycle(self, binary):
        plan = build_plan(SamplerConfig(K=3, cycles=7, seed=8), binary, fit_score_function(binary), 2)

        assert_array_equal(np.bincount(plan.ranks, minlength=4)[1:], [7, 7, 7])
        assert_array_equal(np.bincount(plan.cycles), [3] * 7)
        for cycle in range(7):
            assert len(set(plan.indices[plan.cycles == cycle].tolist())) == 3


class TestRankMarginal:

    def test_selected_unit_follows_order_statistic_law(self):
        rng = RngStream(77)
        levels = rng.integers(0, 6, size=20000).astype(np.float64)
        data = Dataset(levels.reshape(-1, 1), np.zeros(levels.size, dtype=np.int64), 1)
        score = ScoreFunction([1.0])
        K, cycles = 3, 20000
        pool = np.arange(levels.size)

        kept = np.array([levels[rss_cycle(pool, K, score, data, rng.child(c)).indices] for c in range(cycles)])

        for t in range(5):
            F = np.mean(levels <= t)
            for r in range(1, K + 1):
                expected = binom.sf(r - 1, K, F)
                sigma = np.sqrt(expected * (1.0 - expected) / cycles)
                assert abs(np.mean(kept[:, r - 1] <= t) - expected) <= 4.0 * sigma + 1e-3
