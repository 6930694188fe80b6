"""Finite distributions of the margin `z = y f(x)`.

The lab works with `y f(x)` throughout. Writing the same theory with
`z' = -y f(x)` flips the support and reverses the order statistics
(`z'_(r) = -z_(K+1-r)`), which leaves every squared-mean expression and
therefore every variance gap unchanged.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np

from ..numerics.rng import RngStream
from .._algae.exceptions import ContractViolation, StructuralError
from .._algae.utils import isfiniteall, isprobability, raiseif


@dataclass(frozen=True)
class FiniteMarginDistribution:
    """Sorted, distinct support values and their probabilities (summing to 1 within 1e-12)."""
    support: np.ndarray
    probabilities: np.ndarray

    def __post_init__(self):
        support = np.asarray(self.support, dtype=np.float64).reshape(-1)
        probabilities = np.asarray(self.probabilities, dtype=np.float64).reshape(-1)

        raiseif(
            support.size < 1 or support.size != probabilities.size,
            ContractViolation(f':[{support.size}, {probabilities.size}]: Support and probabilities must be equally long and nonempty.')
        )
        raiseif(
            not isfiniteall(support) or np.unique(support).size != support.size,
            ContractViolation('Support values must be finite and distinct.')
        )
        raiseif(
            np.any(probabilities < 0.0) or abs(probabilities.sum() - 1.0) > 1e-12,
            ContractViolation(f':[{probabilities.sum()!r}]: Probabilities must be nonnegative and sum to 1.')
        )

        order = np.argsort(support)
        support, probabilities = support[order], probabilities[order]
        support.setflags(write=False)
        probabilities.setflags(write=False)

        object.__setattr__(self, 'support', support)
        object.__setattr__(self, 'probabilities', probabilities)

    def __len__(self):
        return self.support.size

    @classmethod
    def bernoulli(cls, p: float) -> FiniteMarginDistribution:
        """`P(z = +1) = p`, `P(z = -1) = 1 - p`."""
        raiseif(
            not isprobability(p),
            ContractViolation(f':[{p!r}]: Bernoulli parameter must lie in [0, 1].')
        )

        return cls(np.array([-1.0, 1.0]), np.array([1.0 - p, p]))

    @classmethod
    def point(cls, z: float) -> FiniteMarginDistribution:
        return cls(np.array([z]), np.array([1.0]))

    @classmethod
    def random(cls, rng: RngStream, size: int, low: float = -3.0, high: float = 3.0) -> FiniteMarginDistribution:
        """`size` distinct uniform support points with Dirichlet(1, ..., 1) probabilities."""
        support = np.unique(rng.uniform(low, high, size))
        weights = rng.generator.dirichlet(np.ones(support.size))

        return cls(support, weights / weights.sum())

    @classmethod
    def from_table(cls, path: Union[str, Path]) -> FiniteMarginDistribution:
        """Reads `{"support": [...], "probabilities": [...]}`."""
        try:
            value = json.loads(Path(path).read_text(encoding='utf-8'))
            return cls(value['support'], value['probabilities'])
        except (OSError, KeyError, ValueError, TypeError) as error:
            raise StructuralError(f':[{path}]: Not a margin table; {error}') from error

    @property
    def cdf(self) -> np.ndarray:
        return np.clip(np.cumsum(self.probabilities), 0.0, 1.0)

    @property
    def mean(self) -> float:
        return float(np.dot(self.support, self.probabilities))

    def is_sign(self) -> bool:
        """Whether the support lies in {-1, +1}."""
        return bool(np.all(np.isin(self.support, (-1.0, 1.0))))

    def to_dict(self) -> dict:
        return {'support': self.support.tolist(), 'probabilities': self.probabilities.tolist()}
