"""The repeated-split benchmark comparing SRS and RSS bagging.

Every repeat splits the data, standardizes it with train statistics, fits
the ranking score on the train part and then trains one ensemble per
(sampling kind, loss) from the same per-repeat seed, so SRS and RSS results
are paired by repeat. Each ensemble is evaluated under every requested
fusion rule.
"""
from __future__ import annotations

import logging
import math
import time
from collections import defaultdict
from dataclasses import dataclass, field, replace
from typing import Dict, Final, List, Optional, Sequence, Tuple

from ..concurrent.pool import TaskPool
from ..data.dataset import Dataset, standardize
from ..data.splits import DEFAULT_RATIO, DEFAULT_REPEATS, SplitPlan, make_splits
from ..ensemble.ensemble import DEFAULT_T, EnsembleConfig, Fusion, base_scores, fuse_scores, train_ensemble
from ..evaluation.ledger import MetricRecord
from ..evaluation.metrics import accuracy, macro_f1
from ..losses import LossKind
from ..mlp.config import BASELINES, MlpConfig, baseline_config
from ..mlp.train import train
from ..numerics.rng import RngStream
from ..sampling.sampler import AUTO, TRAIN_STREAM, SamplerConfig, SamplingKind
from ..sampling.score import fit_score_function
from .._algae.exceptions import ContractViolation
from .._algae.utils import isint, raiseif
from .._algae.warnings import downgraded

logger = logging.getLogger(__name__)

# Splits draw from stream 0 of the benchmark seed.
SEED_STREAM: Final[int] = 1
BASELINE_ID: Final[int] = 0


@dataclass(frozen=True)
class BenchmarkConfig:
    """Attributes:
        - `seed` : `int`
        - `T` : `int` = 51
        - `repeats` : `int` = 30
        - `ratio` : `float` = 0.7
        - `K` : `int`, `None` = AUTO
        - `cycles` : `int`, `None` = `⌊|train| / K⌋`
        - `kinds` : `Tuple[SamplingKind, ...]` = (SRS, RSS)
        - `losses` : `Tuple[LossKind, ...]` = (EXP,)
        - `fusions` : `Tuple[Fusion, ...]` = (MEAN,)
        - `mlp` : `MlpConfig`, reshaped to each dataset
    """
    seed: int
    T: int = DEFAULT_T
    repeats: int = DEFAULT_REPEATS
    ratio: float = DEFAULT_RATIO
    K: Optional[int] = AUTO
    cycles: Optional[int] = None
    kinds: Tuple[SamplingKind, ...] = (SamplingKind.SRS, SamplingKind.RSS)
    losses: Tuple[LossKind, ...] = (LossKind.EXP,)
    fusions: Tuple[Fusion, ...] = (Fusion.MEAN,)
    mlp: MlpConfig = field(default_factory=lambda: MlpConfig(1, 2))

    def __post_init__(self):
        raiseif(
            not isint(self.seed),
            ContractViolation(f':[{self.seed!r}]: A benchmark needs an integer seed.')
        )
        raiseif(
            not isint(self.T) or self.T < 1 or not isint(self.repeats) or self.repeats < 1,
            ContractViolation(f':[T={self.T!r}, repeats={self.repeats!r}]: Both must be positive integers.')
        )
        raiseif(
            not (self.kinds and self.losses and self.fusions),
            ContractViolation('At least one sampling kind, loss and fusion rule is required.')
        )

        object.__setattr__(self, 'kinds', tuple(dict.fromkeys(SamplingKind.parse(k) for k in self.kinds)))
        object.__setattr__(self, 'losses', tuple(dict.fromkeys(LossKind.parse(k) for k in self.losses)))
        object.__setattr__(self, 'fusions', tuple(dict.fromkeys(Fusion.parse(f) for f in self.fusions)))

        # Validates K and cycles.
        SamplerConfig(K=self.K, cycles=self.cycles)

    def to_dict(self) -> dict:
        return {
            'seed': self.seed, 'T': self.T, 'repeats': self.repeats, 'ratio': self.ratio,
            'K': 'auto' if self.K is AUTO else self.K, 'cycles': self.cycles,
            'kinds': [k.value for k in self.kinds], 'losses': [k.value for k in self.losses],
            'fusions': [f.value for f in self.fusions], 'mlp': self.mlp.to_dict()
        }

    @classmethod
    def from_dict(cls, value: dict) -> BenchmarkConfig:
        K = value.get('K', 'auto')

        return cls(int(value['seed']), int(value.get('T', DEFAULT_T)), int(value.get('repeats', DEFAULT_REPEATS)),
                   float(value.get('ratio', DEFAULT_RATIO)), None if K in (None, 'auto') else int(K),
                   value.get('cycles'), tuple(value.get('kinds', ('SRS', 'RSS'))), tuple(value.get('losses', ('exp',))),
                   tuple(value.get('fusions', ('mean',))), MlpConfig.from_dict(value['mlp']) if 'mlp' in value else MlpConfig(1, 2))


@dataclass
class BenchmarkResult:
    """Ledger rows in run order plus total training seconds per `<kind>-<loss>` (or baseline) id."""
    records: List[MetricRecord] = field(default_factory=list)
    timings: Dict[str, float] = field(default_factory=lambda: defaultdict(float))

    def extend(self, other: BenchmarkResult) -> BenchmarkResult:
        self.records.extend(other.records)
        for key, seconds in other.timings.items():
            self.timings[key] += seconds

        return self

    def methods(self) -> List[str]:
        return list(dict.fromkeys(record.method for record in self.records))


def method_id(kind: SamplingKind, loss: LossKind, fusion: Fusion) -> str:
    return f'{kind.value}-{loss.value}-{fusion.value}'


def repeat_seed(seed: int, repeat: int) -> int:
    """The training seed shared by every method of one repeat."""
    return int(RngStream(seed, SEED_STREAM).child(repeat).integers(0, 1 << 63))


def feasible_set_size(K: Optional[int], n: int) -> Optional[int]:
    """`K` itself, or the largest `K'` with `K'² <= n` (with a warning) when a cycle would not fit."""
    if K is AUTO or K * K <= n:
        return K

    fitted = max(math.isqrt(n), 1)
    downgraded(K, fitted, f'K² = {K * K} exceeds the {n} training rows')

    return fitted


def _split_data(data: Dataset, split: SplitPlan) -> Tuple[Dataset, Dataset]:
    train_data, test_data, _ = standardize(data.subset(split.train), data.subset(split.test))
    return train_data, test_data


def run_benchmark(data: Dataset, config: BenchmarkConfig, workers: int = 1, tag: str = '') -> BenchmarkResult:
    """Runs every (repeat, loss, kind) ensemble and scores it under each fusion rule.

    Parameters:
        - `data` : `Dataset`, its `name` is the ledger's dataset id
        - `config` : `BenchmarkConfig`
        - `workers` : `int` = 1, threads training base classifiers
        - `tag` : `str` = '', appended to every method id

    Returns:
        - `BenchmarkResult` whose records are ordered by repeat, loss, kind and fusion.
    """
    result = BenchmarkResult()

    for split in make_splits(len(data), config.ratio, config.repeats, config.seed):
        train_data, test_data = _split_data(data, split)
        seed = repeat_seed(config.seed, split.repeat)
        K = feasible_set_size(config.K, len(train_data))
        score = fit_score_function(train_data) if SamplingKind.RSS in config.kinds else None

        for loss in config.losses:
            for kind in config.kinds:
                ensemble_config = EnsembleConfig(config.mlp, SamplerConfig(kind, K, config.cycles), config.T,
                                                 loss, config.fusions[0], seed)

                start = time.perf_counter()
                model = train_ensemble(ensemble_config, train_data, score if kind is SamplingKind.RSS else None, workers)
                result.timings[f'{kind.value}-{loss.value}{tag}'] += time.perf_counter() - start

                scores = base_scores(model, test_data.features)

                for fusion in config.fusions:
                    labels = fuse_scores(scores, fusion).labels
                    result.records.append(MetricRecord(
                        data.name, method_id(kind, loss, fusion) + tag, split.repeat,
                        accuracy(labels, test_data.labels), macro_f1(labels, test_data.labels, data.class_count)
                    ))

        logger.info('%s: repeat %d of %d done', data.name, split.repeat + 1, config.repeats)

    return result


def run_baselines(data: Dataset, config: BenchmarkConfig, workers: int = 1,
                  names: Sequence[str] = BASELINES) -> BenchmarkResult:
    """Single regularized networks trained on the full train split of the benchmark's own splits.

    Method ids are `<baseline>-<loss>`.
    """
    result = BenchmarkResult()

    for split in make_splits(len(data), config.ratio, config.repeats, config.seed):
        train_data, test_data = _split_data(data, split)
        seed = repeat_seed(config.seed, split.repeat)

        for loss in config.losses:
            def fit(name: str):
                mlp_config = baseline_config(name, config.mlp).shaped(train_data.dim, train_data.class_count)
                start = time.perf_counter()
                rng = RngStream(seed, BASELINE_ID).child(TRAIN_STREAM)
                model, _ = train(mlp_config, train_data.features, train_data.labels, loss, rng)
                return model.predict_labels(test_data.features), time.perf_counter() - start

            with TaskPool(workers) as pool:
                fitted = pool.map(fit, names)

            for name, (labels, seconds) in zip(names, fitted):
                method = f'{name}-{loss.value}'
                result.timings[method] += seconds
                result.records.append(MetricRecord(data.name, method, split.repeat, accuracy(labels, test_data.labels),
                                                   macro_f1(labels, test_data.labels, data.class_count)))

    return result


def k_sweep(data: Dataset, set_sizes: Sequence[int], config: BenchmarkConfig, workers: int = 1) -> BenchmarkResult:
    """RSS ensembles at each fixed set size; method ids carry a `-K<size>` suffix."""
    result = BenchmarkResult()

    for K in set_sizes:
        result.extend(run_benchmark(data, replace(config, K=K, kinds=(SamplingKind.RSS,)), workers, f'-K{K}'))

    return result
