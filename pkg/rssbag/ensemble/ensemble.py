"""Bagged ensembles of base networks trained on SRS or RSS samples.

Base classifier `t` (1..T) draws its sample from `RngStream(seed, t).child(0)`
and trains from `RngStream(seed, t).child(1)`, so an ensemble is a pure
function of its config, seed and training data whatever the worker count.
"""
from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Final, List, Optional, Sequence, Union

import numpy as np

from ..concurrent.pool import TaskPool
from ..data.dataset import Dataset
from ..evaluation.metrics import accuracy, macro_f1
from ..losses import LossKind
from ..mlp.config import MlpConfig
from ..mlp.model import MlpModel
from ..mlp.train import train
from ..numerics.matrix import Matrix
from ..numerics.rng import RngStream
from ..sampling.sampler import SamplerConfig, SamplingKind, SamplingPlan, TRAIN_STREAM, build_plan
from ..sampling.score import ScoreFunction, fit_score_function
from .._algae.exceptions import ContractViolation, RssbagException, StructuralError
from .._algae.deco import annotateexception
from .._algae.utils import isint, raiseif

logger = logging.getLogger(__name__)

FORMAT_VERSION: Final[int] = 1
DEFAULT_T: Final[int] = 51
MANIFEST: Final[str] = 'manifest.json'


class Fusion(Enum):
    VOTE = 'vote'
    MEAN = 'mean'

    @classmethod
    def parse(cls, value: Union[str, Fusion]) -> Fusion:
        if isinstance(value, Fusion):
            return value
        try:
            return cls(str(value).lower())
        except ValueError as error:
            raise ContractViolation(f':[{value}]: Unknown fusion rule, expected vote or mean.') from error


@dataclass(frozen=True)
class EnsembleConfig:
    """Attributes:
        - `T` : `int` = 51
        - `sampler` : `SamplerConfig`, its seed is replaced by `seed`
        - `mlp` : `MlpConfig`, widths are reshaped to the training data
        - `loss` : `LossKind` = `LossKind.EXP`
        - `fusion` : `Fusion` = `Fusion.MEAN`
        - `seed` : `int` = 0
    """
    mlp: MlpConfig
    sampler: SamplerConfig = field(default_factory=SamplerConfig)
    T: int = DEFAULT_T
    loss: LossKind = LossKind.EXP
    fusion: Fusion = Fusion.MEAN
    seed: int = 0

    def __post_init__(self):
        raiseif(
            not isint(self.T) or self.T < 1,
            ContractViolation(f':[{self.T!r}]: An ensemble needs at least one base classifier.')
        )

        object.__setattr__(self, 'loss', LossKind.parse(self.loss))
        object.__setattr__(self, 'fusion', Fusion.parse(self.fusion))
        object.__setattr__(self, 'sampler', replace(self.sampler, seed=self.seed))

    def to_dict(self) -> dict:
        return {'T': self.T, 'sampler': self.sampler.to_dict(), 'mlp': self.mlp.to_dict(),
                'loss': self.loss.value, 'fusion': self.fusion.value, 'seed': self.seed}

    @classmethod
    def from_dict(cls, value: dict) -> EnsembleConfig:
        return cls(MlpConfig.from_dict(value['mlp']), SamplerConfig.from_dict(value['sampler']), int(value['T']),
                   value['loss'], value['fusion'], int(value['seed']))


@dataclass(frozen=True)
class FusedPrediction:
    labels: np.ndarray
    scores: Optional[Matrix] = None


class EnsembleModel:
    """T trained base networks and the rule that fuses them."""

    def __init__(self, models: Sequence[MlpModel], fusion: Fusion, config: EnsembleConfig,
                 plans_digest: str = '', score: Optional[ScoreFunction] = None, classes: Sequence[str] = ()):
        raiseif(
            len(models) < 1,
            ContractViolation('An ensemble needs at least one base model.')
        )
        raiseif(
            len({(m.config.input_dim, m.config.output_dim) for m in models}) != 1,
            ContractViolation('All base models must share input and output widths.')
        )

        self.__models = list(models)
        self.__fusion = Fusion.parse(fusion)
        self.__config = config
        self.__digest = plans_digest
        self.__score = score
        self.__classes = tuple(str(c) for c in classes) or tuple(str(c) for c in range(self.class_count))

    def __len__(self):
        return len(self.__models)

    def __repr__(self):
        return f'{EnsembleModel.__name__}[T={len(self)}, {self.__config.sampler.kind.value}, {self.__fusion.value}]'

    @property
    def class_count(self) -> int:
        return self.__models[0].config.output_dim

    @property
    def classes(self) -> tuple:
        """Original label of each class id."""
        return self.__classes

    @property
    def config(self) -> EnsembleConfig:
        return self.__config

    @property
    def fusion(self) -> Fusion:
        return self.__fusion

    @property
    def models(self) -> List[MlpModel]:
        return self.__models

    @property
    def plans_digest(self) -> str:
        return self.__digest

    @property
    def score(self) -> Optional[ScoreFunction]:
        return self.__score

    def permuted(self, order: Sequence[int]) -> EnsembleModel:
        return EnsembleModel([self.__models[i] for i in order], self.__fusion, self.__config, self.__digest,
                             self.__score, self.__classes)

    def save(self, directory: Union[str, Path]):
        """Writes `manifest.json` plus one `model_<t>.json` per base classifier into `directory`."""
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        names = [f'model_{t:03d}.json' for t in range(1, len(self) + 1)]

        for name, model in zip(names, self.__models):
            model.save(directory / name)

        manifest = {
            'version': FORMAT_VERSION,
            'fusion': self.__fusion.value,
            'config': self.__config.to_dict(),
            'plans_digest': self.__digest,
            'score': None if self.__score is None else self.__score.to_dict(),
            'classes': list(self.__classes),
            'models': names
        }

        (directory / MANIFEST).write_text(json.dumps(manifest, indent=2), encoding='utf-8')

    @classmethod
    def load(cls, directory: Union[str, Path]) -> EnsembleModel:
        directory = Path(directory)

        raiseif(
            not (directory / MANIFEST).is_file(),
            StructuralError(f':[{directory}]: Not an ensemble directory, {MANIFEST} is missing.')
        )

        manifest = json.loads((directory / MANIFEST).read_text(encoding='utf-8'))

        raiseif(
            manifest.get('version') != FORMAT_VERSION,
            StructuralError(f':[{manifest.get("version")!r}]: Unsupported ensemble format version.')
        )

        score = manifest.get('score')

        return cls([MlpModel.load(directory / name) for name in manifest['models']], manifest['fusion'],
                   EnsembleConfig.from_dict(manifest['config']), manifest.get('plans_digest', ''),
                   None if score is None else ScoreFunction(score['weights']), manifest.get('classes', ()))


def plans_digest(plans: Sequence[SamplingPlan]) -> str:
    digest = hashlib.sha256()

    for plan in plans:
        digest.update(plan.indices.astype('<i8').tobytes())

    return digest.hexdigest()


def train_ensemble(config: EnsembleConfig, train_data: Dataset, score: Optional[ScoreFunction] = None,
                   workers: int = 1) -> EnsembleModel:
    """Trains T base networks on their own SRS or RSS samples of `train_data`.

    Parameters:
        - `config` : `EnsembleConfig`
        - `train_data` : `Dataset`
        - `score` : `ScoreFunction`, fitted on `train_data` when omitted for RSS
        - `workers` : `int` = 1

    Raises:
        - `RssbagException` subclasses from sampling or training, prefixed with the classifier id.
    """
    if config.sampler.kind is SamplingKind.RSS and score is None:
        score = fit_score_function(train_data)

    mlp_config = config.mlp.shaped(train_data.dim, train_data.class_count)

    @annotateexception(':[classifier {0}]:', RssbagException)
    def fit(t: int):
        plan = build_plan(config.sampler, train_data, score, t)
        model, trace = train(mlp_config, train_data.features[plan.indices], train_data.labels[plan.indices],
                             config.loss, RngStream(config.seed, t).child(TRAIN_STREAM))

        logger.debug('classifier %d trained on %d rows, final risk %.6f', t, len(plan), trace.final_risk)
        return plan, model

    with TaskPool(workers) as pool:
        fitted = pool.map(fit, range(1, config.T + 1))

    logger.info('trained %d %s base classifiers', config.T, config.sampler.kind.value)

    return EnsembleModel([model for _, model in fitted], config.fusion, config,
                         plans_digest([plan for plan, _ in fitted]), score, train_data.classes)


def base_scores(model: EnsembleModel, features: Matrix, upto: int = None) -> np.ndarray:
    """Raw scores of the first `upto` base models, shaped (t x B x C)."""
    models = model.models[:upto] if upto else model.models

    return np.stack([base.predict_scores(features) for base in models])


def fuse_scores(scores: np.ndarray, fusion: Fusion) -> FusedPrediction:
    """Fuses stacked base scores (t x B x C) by plurality vote or by the mean score, ties to the lowest class."""
    if fusion is Fusion.MEAN:
        mean = scores.mean(axis=0)
        return FusedPrediction(np.argmax(mean, axis=1), mean)

    t, B, C = scores.shape
    votes = np.argmax(scores, axis=2)
    counts = np.zeros((B, C), dtype=np.int64)
    np.add.at(counts, (np.broadcast_to(np.arange(B), (t, B)), votes), 1)

    return FusedPrediction(np.argmax(counts, axis=1))


def fuse_predict(model: EnsembleModel, features: Matrix, fusion: Fusion = None, upto: int = None) -> FusedPrediction:
    """Class ids fused over the ensemble (or its first `upto` members).

    Raises:
        - `ContractViolation` : feature width mismatch or `upto` outside `[1, T]`.
    """
    raiseif(
        upto is not None and not 1 <= upto <= len(model),
        ContractViolation(f':[{upto!r}]: Can fuse between 1 and {len(model)} base models.')
    )

    return fuse_scores(base_scores(model, features, upto), Fusion.parse(fusion or model.fusion))


def ensemble_curve(model: EnsembleModel, features: Matrix, truth, sizes: Sequence[int], fusion: Fusion = None) -> List[dict]:
    """Accuracy and macro-F1 of the fused prediction of the first `t` base models, for each `t` in `sizes`."""
    scores = base_scores(model, features)
    fusion = Fusion.parse(fusion or model.fusion)
    curve = []

    for size in sizes:
        raiseif(
            not 1 <= size <= len(model),
            ContractViolation(f':[{size!r}]: Can fuse between 1 and {len(model)} base models.')
        )

        labels = fuse_scores(scores[:size], fusion).labels
        curve.append({'size': int(size), 'accuracy': accuracy(labels, truth),
                      'macro_f1': macro_f1(labels, truth, model.class_count)})

    return curve
