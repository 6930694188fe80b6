"""The variance-based generalization bound.

For a loss that is L-Lipschitz on hypotheses bounded by `max ||f||`, with
`M = L * max ||f||`, with probability at least `1 - delta` the excess
zero-one risk is at most `psi^{-1}(theta)` where

    theta = 2 sqrt(2 M^2 ln(1/delta) / N) + 2 sqrt(variance) + approximation error

and `psi^{-1}` is the exponential-loss link. The caller supplies M and the
variance; nothing here takes a supremum over a hypothesis class.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

from ..losses import psi_inverse_exp
from .._algae.exceptions import ContractViolation
from .._algae.utils import raiseif


@dataclass(frozen=True)
class BoundReport:
    theta: float
    value: float
    clamped: bool

    def to_dict(self) -> dict:
        return asdict(self)


def bound_value(M: float, N: int, delta: float, variance: float, approx_error: float = 0.0) -> BoundReport:
    """Evaluates the bound; `theta > 1` is clamped to 1 and flagged.

    Raises:
        - `ContractViolation` : `M <= 0`, `N < 1`, `delta` outside (0, 1), negative variance or approximation error.
    """
    raiseif(
        not M > 0.0,
        ContractViolation(f':[{M!r}]: M must be positive.')
    )
    raiseif(
        not N >= 1,
        ContractViolation(f':[{N!r}]: N must be at least 1.')
    )
    raiseif(
        not 0.0 < delta < 1.0,
        ContractViolation(f':[{delta!r}]: delta must lie in (0, 1).')
    )
    raiseif(
        not variance >= 0.0 or not approx_error >= 0.0,
        ContractViolation(f':[{variance!r}, {approx_error!r}]: Variance and approximation error must be nonnegative.')
    )

    theta = 2.0 * math.sqrt(2.0 * M * M * math.log(1.0 / delta) / N) + 2.0 * math.sqrt(variance) + approx_error

    return BoundReport(theta, psi_inverse_exp(min(theta, 1.0)), theta > 1.0)
