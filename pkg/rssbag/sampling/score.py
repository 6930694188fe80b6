"""The ranking score used to order units inside an RSS group.

The score of a row is its projection onto the vector of per-feature Spearman
correlations with the class ids, fitted on the training split only.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..data.dataset import Dataset
from ..numerics.matrix import Matrix
from ..numerics.ranks import spearman
from .._algae.exceptions import ContractViolation, UndefinedCorrelation
from .._algae.utils import isfiniteall, raiseif


@dataclass(frozen=True)
class ScoreFunction:
    weights: np.ndarray

    def __post_init__(self):
        weights = np.asarray(self.weights, dtype=np.float64).reshape(-1)

        raiseif(
            not isfiniteall(weights),
            ContractViolation('Score weights must be finite.')
        )

        weights.setflags(write=False)
        object.__setattr__(self, 'weights', weights)

    def __call__(self, features: Matrix) -> np.ndarray:
        return self.apply(features)

    def apply(self, features: Matrix) -> np.ndarray:
        raiseif(
            features.shape[-1] != self.weights.size,
            ContractViolation(f':[{features.shape[-1]}]: Expected {self.weights.size} features to score.')
        )

        return features @ self.weights

    def to_dict(self) -> dict:
        return {'weights': self.weights.tolist()}


def fit_score_function(train: Dataset) -> ScoreFunction:
    """Fits the Spearman weight of every feature against the class ids.

    Constant columns, and every column when `train` holds a single class, get weight 0.

    Raises:
        - `ContractViolation` : fewer than two rows.
    """
    raiseif(
        len(train) < 2,
        ContractViolation(f':[{len(train)}]: A score function needs at least two rows.')
    )

    weights = np.zeros(train.dim)

    for j in range(train.dim):
        try:
            weights[j] = spearman(train.features[:, j], train.labels)
        except UndefinedCorrelation:
            weights[j] = 0.0

    return ScoreFunction(weights)
