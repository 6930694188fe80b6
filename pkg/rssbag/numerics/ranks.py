"""Average ranks and Spearman correlation."""
from __future__ import annotations

from typing import Sequence

import numpy as np
from scipy.stats import rankdata

from .._algae.exceptions import ContractViolation, UndefinedCorrelation
from .._algae.utils import raiseif

RankVector = np.ndarray


def average_ranks(values: Sequence[float]) -> RankVector:
    """Ranks `values` from 1 to n, tied values sharing the mean of the ranks they span.

    Raises:
        - `ContractViolation` : empty input, NaN or infinite values.
    """
    values = np.asarray(values, dtype=np.float64).reshape(-1)

    raiseif(
        values.size == 0,
        ContractViolation('Cannot rank an empty sequence.')
    )
    if not np.all(np.isfinite(values)):
        raise ContractViolation(f':[{values[~np.isfinite(values)][0]}]: Cannot rank non-finite values.')

    return rankdata(values, method='average')


def pearson(x: np.ndarray, y: np.ndarray) -> float:
    x = x - x.mean()
    y = y - y.mean()
    denominator = np.sqrt(np.dot(x, x) * np.dot(y, y))

    raiseif(
        denominator <= 0.0,
        UndefinedCorrelation('Correlation of a constant sequence is undefined.')
    )

    return float(np.clip(np.dot(x, y) / denominator, -1.0, 1.0))


def spearman(x: Sequence[float], y: Sequence[float]) -> float:
    """Spearman rank correlation as the Pearson correlation of average ranks.

    Raises:
        - `ContractViolation` : unequal lengths or fewer than two values.
        - `UndefinedCorrelation` : either sequence is constant.
    """
    x, y = np.asarray(x, dtype=np.float64).reshape(-1), np.asarray(y, dtype=np.float64).reshape(-1)

    raiseif(
        x.size != y.size or x.size < 2,
        ContractViolation(f':[{x.size}, {y.size}]: Spearman needs two equal-length sequences of at least 2 values.')
    )

    return pearson(average_ranks(x), average_ranks(y))
