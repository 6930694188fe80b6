"""Synthetic classification problems for desk-scale runs."""
from __future__ import annotations

import math
from enum import Enum
from typing import Union

import numpy as np

from ..data.dataset import Dataset
from ..numerics.rng import RngStream
from .._algae.exceptions import ContractViolation
from .._algae.utils import isint, raiseif


class SyntheticKind(Enum):
    TWONORM = 'twonorm'
    BLOBS = 'blobs'

    @classmethod
    def parse(cls, value: Union[str, SyntheticKind]) -> SyntheticKind:
        if isinstance(value, SyntheticKind):
            return value
        try:
            return cls(str(value).lower())
        except ValueError as error:
            raise ContractViolation(f':[{value}]: Unknown synthetic dataset, expected twonorm or blobs.') from error


def _check(n: int, d: int, classes: int):
    raiseif(
        not all(isint(v) for v in (n, d, classes)) or n < classes or d < 1 or classes < 2,
        ContractViolation(f':[n={n!r}, d={d!r}, classes={classes!r}]: Need n >= classes >= 2 and d >= 1.')
    )


def twonorm(n: int = 2000, d: int = 20, rng: RngStream = None) -> Dataset:
    """Two unit-covariance Gaussians centred at `+a` and `-a` in every coordinate, `a = 2 / sqrt(d)`.

    Classes alternate so both have `n / 2` rows (up to one).
    """
    _check(n, d, 2)
    rng = rng or RngStream(0)

    labels = np.arange(n, dtype=np.int64) % 2
    a = 2.0 / math.sqrt(d)
    features = rng.normal(size=(n, d)) + np.where(labels == 1, a, -a)[:, None]

    return Dataset(features, labels, 2, name='twonorm')


def blobs(n: int = 2000, d: int = 20, classes: int = 3, rng: RngStream = None, spread: float = 1.0) -> Dataset:
    """Isotropic Gaussian clusters around centres drawn from `N(0, spread² I)`."""
    _check(n, d, classes)
    raiseif(
        not spread > 0.0,
        ContractViolation(f':[{spread!r}]: Spread must be positive.')
    )

    rng = rng or RngStream(0)
    centres = rng.child(0).normal(0.0, spread, size=(classes, d))
    labels = np.arange(n, dtype=np.int64) % classes
    features = centres[labels] + rng.child(1).normal(size=(n, d))

    return Dataset(features, labels, classes, name='blobs')


def generate(kind: SyntheticKind, n: int, d: int, classes: int = 3, seed: int = 0) -> Dataset:
    kind = SyntheticKind.parse(kind)
    rng = RngStream(seed)

    if kind is SyntheticKind.TWONORM:
        return twonorm(n, d, rng)

    return blobs(n, d, classes, rng)
