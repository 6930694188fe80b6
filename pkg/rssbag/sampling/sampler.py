"""Per-classifier training index sets drawn by SRS bootstrap or ranked set sampling.

A ranked set sampling cycle draws K² distinct units, splits them at random
into K groups of K, orders each group by the ranking score and keeps the
r-th smallest unit of group r. A plan is m independent cycles; the pool
of candidates is the full index range again at the start of every cycle.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Final, List, Optional, Sequence, Tuple, Union

import numpy as np

from .score import ScoreFunction
from ..data.dataset import Dataset
from ..numerics.rng import RngStream
from .._algae.exceptions import ContractViolation, InfeasibleSampling, StructuralError
from .._algae.utils import isint, raiseif

AUTO: Final = None

# Child stream ids under a classifier's stream.
PLAN_STREAM: Final[int] = 0
TRAIN_STREAM: Final[int] = 1


class SamplingKind(Enum):
    SRS = 'SRS'
    RSS = 'RSS'

    @classmethod
    def parse(cls, value: Union[str, SamplingKind]) -> SamplingKind:
        if isinstance(value, SamplingKind):
            return value
        try:
            return cls(str(value).upper())
        except ValueError as error:
            raise ContractViolation(f':[{value}]: Unknown sampling kind, expected SRS or RSS.') from error


def auto_set_size(n: int) -> int:
    """`⌊√n⌋`, the largest K for which a cycle of K² units fits in `n`."""
    return max(math.isqrt(n), 1)


@dataclass(frozen=True)
class SamplerConfig:
    """How the base training sets of an ensemble are drawn.

    Attributes:
        - `kind` : `SamplingKind`
        - `K` : `int`, `None` = AUTO (`⌊√N⌋`)
        - `cycles` : `int`, `None` = `⌊N/K⌋`
        - `seed` : `int`
    """
    kind: SamplingKind = SamplingKind.RSS
    K: Optional[int] = AUTO
    cycles: Optional[int] = None
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, 'kind', SamplingKind.parse(self.kind))

        raiseif(
            self.K is not AUTO and (not isint(self.K) or self.K < 1),
            ContractViolation(f':[{self.K!r}]: Set size K must be a positive integer or AUTO.')
        )
        raiseif(
            self.cycles is not None and (not isint(self.cycles) or self.cycles < 1),
            ContractViolation(f':[{self.cycles!r}]: Cycle count must be a positive integer.')
        )

    def resolve(self, n: int) -> Tuple[int, int]:
        """The concrete `(K, m)` for a dataset of `n` rows.

        Raises:
            - `InfeasibleSampling` : RSS with `K² > n`.
        """
        K = auto_set_size(n) if self.K is AUTO else int(self.K)
        m = self.cycles if self.cycles is not None else max(n // K, 1)

        raiseif(
            self.kind is SamplingKind.RSS and K * K > n,
            InfeasibleSampling(f':[K={K}]: A ranked set cycle needs K² = {K * K} units but only {n} exist.')
        )

        return K, m

    def to_dict(self) -> dict:
        return {'kind': self.kind.value, 'K': 'auto' if self.K is AUTO else self.K,
                'cycles': self.cycles, 'seed': self.seed}

    @classmethod
    def from_dict(cls, value: dict) -> SamplerConfig:
        K = value.get('K', 'auto')
        return cls(value.get('kind', 'RSS'), None if K in (None, 'auto') else int(K), value.get('cycles'), int(value.get('seed', 0)))


@dataclass(frozen=True)
class RssCycle:
    """The K units kept by one cycle, with their rank positions (1..K) and groups."""
    indices: np.ndarray
    ranks: np.ndarray
    groups: np.ndarray


@dataclass(frozen=True)
class SamplingPlan:
    kind: SamplingKind
    K: int
    m: int
    seed: int
    classifier_id: int
    indices: np.ndarray
    ranks: Optional[np.ndarray] = None
    cycles: Optional[np.ndarray] = None

    def __len__(self):
        return self.indices.size

    @property
    def annotations(self) -> List[Tuple[int, int, int]]:
        """`(cycle, rank position, group)` of every selected index; empty for SRS plans."""
        if self.ranks is None:
            return []

        return [(int(c), int(r), int(r)) for c, r in zip(self.cycles, self.ranks)]

    def to_dict(self) -> dict:
        return {
            'kind': self.kind.value,
            'K': self.K,
            'm': self.m,
            'seed': self.seed,
            'classifier_id': self.classifier_id,
            'indices': self.indices.tolist(),
            'ranks': None if self.ranks is None else self.ranks.tolist(),
            'cycles': None if self.cycles is None else self.cycles.tolist()
        }

    @classmethod
    def from_dict(cls, value: dict) -> SamplingPlan:
        try:
            ranks, cycles = value.get('ranks'), value.get('cycles')
            return cls(SamplingKind.parse(value['kind']), int(value['K']), int(value['m']), int(value['seed']),
                       int(value['classifier_id']), np.asarray(value['indices'], dtype=np.int64),
                       None if ranks is None else np.asarray(ranks, dtype=np.int64),
                       None if cycles is None else np.asarray(cycles, dtype=np.int64))
        except KeyError as error:
            raise StructuralError(f':[{error.args[0]}]: Sampling plan is missing a field.') from error

    def save(self, path: Union[str, Path]):
        Path(path).write_text(json.dumps(self.to_dict()), encoding='utf-8')

    @classmethod
    def load(cls, path: Union[str, Path]) -> SamplingPlan:
        return cls.from_dict(json.loads(Path(path).read_text(encoding='utf-8')))


def srs_sample(n: int, size: int, rng: RngStream) -> np.ndarray:
    """`size` indices drawn uniformly from `range(n)` with replacement."""
    raiseif(
        not isint(n) or n < 1,
        ContractViolation(f':[{n!r}]: Cannot sample from an empty range.')
    )

    return rng.integers(0, n, size=size).astype(np.int64)


def select_ranked(groups: np.ndarray, scores: np.ndarray) -> np.ndarray:
    """Keeps the r-th smallest unit of the r-th row of `groups`.

    Units are ordered by ascending score, ties by ascending index.

    Parameters:
        - `groups` : `ndarray[int]` (K x K) unit indices, one group per row
        - `scores` : `ndarray[float]` (K x K) score of each unit
    """
    K = groups.shape[0]
    order = np.lexsort((groups, scores), axis=-1)
    ordered = np.take_along_axis(groups, order, axis=1)

    return ordered[np.arange(K), np.arange(K)]


def rss_cycle(pool: Sequence[int], K: int, score: ScoreFunction, data: Dataset, rng: RngStream) -> RssCycle:
    """Runs one ranked set sampling cycle over `pool`.

    Raises:
        - `InfeasibleSampling` : `|pool| < K²`.
    """
    pool = np.asarray(pool, dtype=np.int64)

    raiseif(
        pool.size < K * K,
        InfeasibleSampling(f':[K={K}]: A cycle needs {K * K} distinct units, the pool holds {pool.size}.')
    )

    groups = pool[rng.choice(pool.size, K * K, replace=False)].reshape(K, K)
    scores = score.apply(data.features[groups.reshape(-1)]).reshape(K, K)
    positions = np.arange(1, K + 1, dtype=np.int64)

    return RssCycle(select_ranked(groups, scores), positions, positions.copy())


def build_plan(config: SamplerConfig, data: Dataset, score: Optional[ScoreFunction], classifier_id: int) -> SamplingPlan:
    """Draws the training index sequence (length K·m) of one base classifier.

    The plan depends only on `(config.seed, classifier_id)`, never on which
    thread builds it or in what order.

    Raises:
        - `InfeasibleSampling` : RSS with `K² > N`.
        - `ContractViolation` : RSS without a score function.
    """
    n = len(data)
    K, m = config.resolve(n)
    rng = RngStream(config.seed, classifier_id).child(PLAN_STREAM)

    if config.kind is SamplingKind.SRS:
        return SamplingPlan(config.kind, K, m, config.seed, classifier_id, srs_sample(n, K * m, rng))

    raiseif(
        score is None,
        ContractViolation('Ranked set sampling needs a score function.')
    )

    pool = np.arange(n, dtype=np.int64)
    indices, ranks, cycles = [], [], []

    for cycle in range(m):
        drawn = rss_cycle(pool, K, score, data, rng)
        indices.append(drawn.indices)
        ranks.append(drawn.ranks)
        cycles.append(np.full(K, cycle, dtype=np.int64))

    return SamplingPlan(config.kind, K, m, config.seed, classifier_id,
                        np.concatenate(indices), np.concatenate(ranks), np.concatenate(cycles))
