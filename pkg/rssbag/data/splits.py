"""Repeated random train/test partitions.

Repeat `r` of a run with seed `s` always draws its permutation from
`RngStream(s).child(r)`, so any single repeat can be regenerated alone.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Final, List, Sequence, Union

import numpy as np

from ..numerics.rng import RngStream
from .._algae.exceptions import ContractViolation, StructuralError
from .._algae.utils import isint, raiseif

DEFAULT_RATIO: Final[float] = 0.7
DEFAULT_REPEATS: Final[int] = 30


@dataclass(frozen=True)
class SplitPlan:
    train: np.ndarray
    test: np.ndarray
    ratio: float
    repeat: int
    seed: int

    def __post_init__(self):
        train = np.asarray(self.train, dtype=np.int64)
        test = np.asarray(self.test, dtype=np.int64)

        raiseif(
            np.intersect1d(train, test).size > 0,
            ContractViolation(f':[repeat {self.repeat}]: Train and test indices overlap.')
        )

        object.__setattr__(self, 'train', train)
        object.__setattr__(self, 'test', test)

    def to_dict(self) -> dict:
        return {'repeat': self.repeat, 'seed': self.seed, 'ratio': self.ratio,
                'train': self.train.tolist(), 'test': self.test.tolist()}

    @classmethod
    def from_dict(cls, value: dict) -> SplitPlan:
        try:
            return cls(value['train'], value['test'], float(value.get('ratio', DEFAULT_RATIO)),
                       int(value['repeat']), int(value['seed']))
        except KeyError as error:
            raise StructuralError(f':[{error.args[0]}]: Split plan is missing a field.') from error


def train_size(n: int, ratio: float) -> int:
    """`round(ratio * n)` with halves rounded up, kept inside `[1, n - 1]`."""
    return min(max(int(math.floor(ratio * n + 0.5)), 1), n - 1)


def make_splits(n: int, ratio: float = DEFAULT_RATIO, repeats: int = DEFAULT_REPEATS, seed: int = 0) -> List[SplitPlan]:
    """Generates `repeats` reproducible, unstratified train/test partitions of `range(n)`.

    Raises:
        - `ContractViolation` : `n < 2`, `ratio` outside (0, 1) or `repeats < 1`.
    """
    raiseif(
        not isint(n) or n < 2,
        ContractViolation(f':[{n!r}]: Cannot split fewer than two objects.')
    )
    raiseif(
        not 0.0 < ratio < 1.0,
        ContractViolation(f':[{ratio!r}]: Split ratio must lie strictly between 0 and 1.')
    )
    raiseif(
        not isint(repeats) or repeats < 1,
        ContractViolation(f':[{repeats!r}]: At least one repeat is required.')
    )

    cut = train_size(n, ratio)
    root = RngStream(seed)
    plans = []

    for repeat in range(repeats):
        order = root.child(repeat).permutation(n)
        plans.append(SplitPlan(np.sort(order[:cut]), np.sort(order[cut:]), ratio, repeat, seed))

    return plans


def save_splits(path: Union[str, Path], plans: Sequence[SplitPlan]):
    Path(path).write_text(json.dumps([plan.to_dict() for plan in plans]), encoding='utf-8')


def load_splits(path: Union[str, Path]) -> List[SplitPlan]:
    return [SplitPlan.from_dict(value) for value in json.loads(Path(path).read_text(encoding='utf-8'))]
