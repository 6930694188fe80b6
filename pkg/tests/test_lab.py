import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from rssbag._algae.exceptions import ContractViolation, FormulaDomainError, StructuralError
from rssbag.lab import variance
from rssbag.lab.bound import bound_value
from rssbag.lab.distribution import FiniteMarginDistribution
from rssbag.lab.variance import (GAP_CONSTANTS, closed_form_gap, decay_table, exact_gap, exact_moments,
                                 exact_order_stat_means, gap_report, mc_moments, order_stat_pmfs)
from rssbag.losses import LossKind
from rssbag.numerics.rng import RngStream
from rssbag.sampling.sampler import SamplingKind

HALF = FiniteMarginDistribution.bernoulli(0.5)


class TestDistribution:

    def test_sorted_on_construction(self):
        dist = FiniteMarginDistribution([1.0, -2.0, 0.5], [0.2, 0.5, 0.3])

        assert dist.support.tolist() == [-2.0, 0.5, 1.0]
        assert dist.probabilities.tolist() == [0.5, 0.3, 0.2]

    @pytest.mark.parametrize('support, probabilities', [
        ([0.0, 0.0], [0.5, 0.5]),
        ([0.0, 1.0], [0.5, 0.6]),
        ([0.0, 1.0], [-0.1, 1.1]),
        ([], []),
    ])
    def test_rejects(self, support, probabilities):
        with pytest.raises(ContractViolation):
            FiniteMarginDistribution(support, probabilities)

    def test_table(self, tmp_path):
        path = tmp_path / 'margins.json'
        path.write_text('{"support": [-1, 2], "probabilities": [0.25, 0.75]}', encoding='utf-8')

        assert FiniteMarginDistribution.from_table(path).mean == pytest.approx(1.25)

        path.write_text('{"support": [-1, 2]}', encoding='utf-8')
        with pytest.raises(StructuralError):
            FiniteMarginDistribution.from_table(path)


class TestOrderStatistics:

    def test_bernoulli_means(self):
        p = 0.3
        means = exact_order_stat_means(FiniteMarginDistribution.bernoulli(p), 2)
        assert_allclose(means, [2 * p * p - 1, 1 - 2 * (1 - p) ** 2], atol=1e-12)

    def test_single_draw_is_the_distribution(self, rng):
        dist = FiniteMarginDistribution.random(rng, 6)
        assert_allclose(order_stat_pmfs(dist, 1)[0], dist.probabilities, atol=1e-12)

    @pytest.mark.parametrize('K', [2, 3, 5])
    def test_rows_are_distributions_mixing_to_the_base(self, rng, K):
        dist = FiniteMarginDistribution.random(rng, 7)
        pmfs = order_stat_pmfs(dist, K)

        assert np.all(pmfs >= -1e-15)
        assert_allclose(pmfs.sum(axis=1), 1.0, atol=1e-12)
        assert_allclose(pmfs.mean(axis=0), dist.probabilities, atol=1e-12)

    def test_means_increase_with_rank(self, rng):
        means = exact_order_stat_means(FiniteMarginDistribution.random(rng, 5), 4)
        assert np.all(np.diff(means) >= -1e-12)


class TestExactMoments:

    @pytest.mark.parametrize('loss', list(LossKind))
    def test_unbiased_and_never_worse(self, loss):
        rng = RngStream(31)

        for i in range(100):
            dist = FiniteMarginDistribution.random(rng.child(i), 2 + i % 6)
            for K in range(2, 6):
                srs = exact_moments(SamplingKind.SRS, loss, dist, K, 3)
                rss = exact_moments(SamplingKind.RSS, loss, dist, K, 3)

                assert rss.mean == pytest.approx(srs.mean, rel=1e-12, abs=1e-12)
                assert rss.variance <= srs.variance + 1e-12

    @pytest.mark.parametrize('loss', list(LossKind))
    def test_gap_is_variance_difference(self, rng, loss):
        dist = FiniteMarginDistribution.random(rng, 5)
        srs = exact_moments(SamplingKind.SRS, loss, dist, 3, 4)
        rss = exact_moments(SamplingKind.RSS, loss, dist, 3, 4)

        assert exact_gap(loss, dist, 3, 4) == pytest.approx(rss.variance - srs.variance, rel=1e-9, abs=1e-15)

    def test_point_mass_has_no_variance(self):
        dist = FiniteMarginDistribution.point(0.4)

        for kind in SamplingKind:
            assert exact_moments(kind, LossKind.EXP, dist, 3, 2).variance == 0.0

    def test_rejects_bad_sizes(self):
        with pytest.raises(ContractViolation):
            exact_moments(SamplingKind.RSS, LossKind.EXP, HALF, 0, 1)


class TestClosedForm:

    def test_constants(self):
        assert GAP_CONSTANTS[LossKind.EXP] == pytest.approx(1.381097, abs=1e-6)
        assert GAP_CONSTANTS[LossKind.LOG] == 0.25

    @pytest.mark.parametrize('loss, expected', [(LossKind.EXP, -0.0172637), (LossKind.LOG, -0.003125)])
    def test_fair_coin(self, loss, expected):
        assert closed_form_gap(loss, 2, 10, HALF) == pytest.approx(expected, abs=1e-7)

    @pytest.mark.parametrize('loss', list(LossKind))
    @pytest.mark.parametrize('p', [0.1, 0.5, 0.8])
    @pytest.mark.parametrize('K', [2, 3, 4])
    def test_agrees_with_exact_on_signs(self, loss, p, K):
        dist = FiniteMarginDistribution.bernoulli(p)
        assert closed_form_gap(loss, K, 5, dist) == pytest.approx(exact_gap(loss, dist, K, 5), rel=1e-9, abs=1e-15)

    def test_degenerate_coin(self):
        assert closed_form_gap(LossKind.EXP, 3, 4, FiniteMarginDistribution.bernoulli(1.0)) == pytest.approx(0.0, abs=1e-15)

    def test_outside_sign_support(self):
        with pytest.raises(FormulaDomainError):
            closed_form_gap(LossKind.EXP, 2, 10, FiniteMarginDistribution([-1.0, 0.5], [0.5, 0.5]))

    def test_report_notes_the_domain(self):
        report = gap_report(LossKind.LOG, FiniteMarginDistribution([-1.0, 0.5], [0.5, 0.5]), 2, 3)

        assert report.closed_form is None
        assert report.notes and report.exact < 0.0
        assert report.to_dict()['closed_form_gap'] is None

    def test_halves_when_cycles_double(self):
        gaps = [closed_form_gap(LossKind.EXP, 2, m, HALF) for m in (5, 10, 20)]
        assert gaps[0] / gaps[1] == pytest.approx(2.0, rel=1e-12)
        assert gaps[1] / gaps[2] == pytest.approx(2.0, rel=1e-12)


class TestMonteCarlo:

    @pytest.mark.parametrize('loss, expected', [(LossKind.EXP, -0.0172637), (LossKind.LOG, -0.003125)])
    def test_fair_coin_gap(self, loss, expected):
        report = gap_report(loss, HALF, 2, 10, trials=100000, rng=RngStream(5))
        mean_sigma = math.hypot(report.srs.mean_se, report.rss.mean_se)

        assert abs(report.rss.mean - report.srs.mean) <= 4.0 * mean_sigma
        assert abs(report.mc_gap - expected) <= 4.0 * report.mc_sigma
        assert abs(report.z_score) <= 4.0

    def test_point_mass(self):
        report = mc_moments(SamplingKind.RSS, LossKind.LOG, FiniteMarginDistribution.point(-0.2), 3, 2, 500, RngStream(1))

        assert report.variance <= 1e-20
        assert report.mean == pytest.approx(math.log1p(math.exp(0.2)))

    def test_independent_of_workers(self, monkeypatch):
        monkeypatch.setattr(variance, 'DRAWS_PER_CHUNK', 1000)
        runs = [mc_moments(SamplingKind.RSS, LossKind.EXP, HALF, 2, 5, 3000, RngStream(9), workers)
                for workers in (1, 4)]

        assert runs[0] == runs[1]

    def test_rejects_zero_trials(self):
        with pytest.raises(ContractViolation):
            mc_moments(SamplingKind.SRS, LossKind.EXP, HALF, 2, 5, 0, RngStream(0))

    def test_decay(self):
        rows = decay_table(LossKind.EXP, HALF, 2, [5, 10, 20], 40000, RngStream(12))

        assert [row['N'] for row in rows] == [10, 20, 40]
        for row in rows:
            assert abs(row['mc_gap'] - row['closed_form_gap']) <= 4.0 * row['mc_sigma']

        assert rows[0]['closed_form_gap'] == pytest.approx(2.0 * rows[1]['closed_form_gap'], rel=1e-12)

    @pytest.mark.slow
    @pytest.mark.parametrize('loss', list(LossKind))
    @pytest.mark.parametrize('p', [0.2, 0.5, 0.9])
    @pytest.mark.parametrize('K', [2, 3, 4])
    def test_grid(self, loss, p, K):
        report = gap_report(loss, FiniteMarginDistribution.bernoulli(p), K, 6, trials=50000, rng=RngStream(K, round(p * 10)))
        assert abs(report.z_score) <= 4.0


class TestBound:

    def test_reference_value(self):
        report = bound_value(1.0, 100, 0.05, 0.01)

        assert report.theta == pytest.approx(0.68956, abs=1e-4)
        assert report.value == pytest.approx(0.95059, abs=1e-4)
        assert not report.clamped

    def test_monotone(self):
        Ns = [10, 50, 100, 1000, 10000]
        variances = [0.0, 0.001, 0.01, 0.05]

        for V in variances:
            values = [bound_value(0.5, N, 0.1, V).value for N in Ns]
            assert all(a >= b for a, b in zip(values, values[1:]))

        for N in Ns:
            values = [bound_value(0.5, N, 0.1, V).value for V in variances]
            assert all(a <= b for a, b in zip(values, values[1:]))

    def test_clamped(self):
        report = bound_value(10.0, 1, 0.05, 0.5)

        assert report.clamped and report.theta > 1.0
        assert report.value == 1.0

    @pytest.mark.parametrize('args', [(0.0, 10, 0.1, 0.0), (1.0, 0, 0.1, 0.0), (1.0, 10, 1.0, 0.0),
                                      (1.0, 10, 0.1, -1e-3), (1.0, 10, 0.1, 0.0, -1.0)])
    def test_contracts(self, args):
        with pytest.raises(ContractViolation):
            bound_value(*args)
