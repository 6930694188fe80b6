import numpy as np
import pytest
from numpy.testing import assert_array_equal

from rssbag._algae.exceptions import ContractViolation, InfeasibleSampling
from rssbag.ensemble.ensemble import (EnsembleConfig, EnsembleModel, Fusion, base_scores, ensemble_curve,
                                      fuse_predict, fuse_scores, train_ensemble)
from rssbag.sampling.sampler import SamplerConfig, SamplingKind


@pytest.fixture
def config(small_mlp):
    return EnsembleConfig(small_mlp, SamplerConfig(SamplingKind.RSS), T=3, seed=4)


@pytest.fixture
def ensemble(config, binary):
    return train_ensemble(config, binary)


class TestFusion:

    def test_plurality_vote(self):
        scores = np.array([[[0.0, 1.0]], [[0.0, 2.0]], [[3.0, 0.0]]])
        assert_array_equal(fuse_scores(scores, Fusion.VOTE).labels, [1])

    def test_vote_tie_goes_to_lowest_class(self):
        scores = np.array([[[0.0, 1.0]], [[1.0, 0.0]]])
        assert_array_equal(fuse_scores(scores, Fusion.VOTE).labels, [0])

    def test_mean_of_raw_scores(self):
        fused = fuse_scores(np.array([[[1.0, 0.0]], [[0.0, 2.0]]]), Fusion.MEAN)

        assert_array_equal(fused.scores, [[0.5, 1.0]])
        assert_array_equal(fused.labels, [1])

    def test_unanimous_models_agree(self, rng):
        one = rng.normal(size=(5, 3))
        scores = np.stack([one, one * 2.0, one + 0.0])

        assert_array_equal(fuse_scores(scores, Fusion.VOTE).labels, fuse_scores(scores, Fusion.MEAN).labels)

    def test_parse(self):
        assert Fusion.parse('Vote') is Fusion.VOTE
        with pytest.raises(ContractViolation):
            Fusion.parse('max')


class TestTraining:

    def test_shape(self, ensemble, binary):
        assert len(ensemble) == 3
        assert ensemble.class_count == 2
        assert ensemble.classes == binary.classes
        assert base_scores(ensemble, binary.features).shape == (3, len(binary), 2)

    def test_independent_of_workers(self, config, binary, ensemble):
        parallel = train_ensemble(config, binary, workers=3)

        assert parallel.plans_digest == ensemble.plans_digest
        assert all(a == b for a, b in zip(parallel.models, ensemble.models))

    def test_seed_changes_plans(self, config, binary, ensemble):
        other = train_ensemble(EnsembleConfig(config.mlp, config.sampler, 3, seed=5), binary)
        assert other.plans_digest != ensemble.plans_digest

    def test_config_seed_overrides_sampler_seed(self, small_mlp):
        assert EnsembleConfig(small_mlp, SamplerConfig(seed=1), seed=8).sampler.seed == 8

    def test_srs(self, small_mlp, binary):
        model = train_ensemble(EnsembleConfig(small_mlp, SamplerConfig(SamplingKind.SRS), T=2), binary)
        assert model.score is None

    def test_infeasible_K_names_classifier(self, small_mlp, binary):
        with pytest.raises(InfeasibleSampling, match='classifier 1'):
            train_ensemble(EnsembleConfig(small_mlp, SamplerConfig(K=7), T=2), binary)

    def test_config_round_trip(self, config):
        assert EnsembleConfig.from_dict(config.to_dict()) == config


class TestPrediction:

    @pytest.mark.parametrize('fusion', list(Fusion))
    def test_permutation_invariant(self, ensemble, binary, fusion):
        shuffled = ensemble.permuted([2, 0, 1])

        assert_array_equal(fuse_predict(shuffled, binary.features, fusion).labels,
                           fuse_predict(ensemble, binary.features, fusion).labels)

    def test_upto(self, ensemble, binary):
        first = ensemble.models[0].predict_labels(binary.features)
        assert_array_equal(fuse_predict(ensemble, binary.features, Fusion.MEAN, upto=1).labels, first)

    def test_upto_range(self, ensemble, binary):
        with pytest.raises(ContractViolation):
            fuse_predict(ensemble, binary.features, upto=4)

    def test_curve(self, ensemble, binary):
        curve = ensemble_curve(ensemble, binary.features, binary.labels, [1, 3])

        assert [row['size'] for row in curve] == [1, 3]
        assert all(0.0 <= row['accuracy'] <= 1.0 for row in curve)

    def test_save_and_load(self, ensemble, binary, tmp_path):
        ensemble.save(tmp_path / 'model')
        again = EnsembleModel.load(tmp_path / 'model')

        assert (tmp_path / 'model' / 'model_003.json').is_file()
        assert again.plans_digest == ensemble.plans_digest
        assert again.config == ensemble.config
        assert_array_equal(fuse_predict(again, binary.features).scores, fuse_predict(ensemble, binary.features).scores)
