"""Convex margin losses and the one-vs-rest encoding that feeds them.

A label `y` of a C-class problem becomes the sign vector `t` with `t[y] = +1`
and `-1` everywhere else; the risk of a score matrix `o` is the mean of
`phi(t * o)` over all B·C entries. With two classes this is the binary
`phi(y f(x))` counted once per mirrored output.
"""
from __future__ import annotations

from enum import Enum
from typing import Tuple, Union

import numpy as np
from scipy.special import expit

from .numerics.matrix import Matrix
from ._algae.exceptions import ContractViolation
from ._algae.utils import raiseif
from ._algae.warnings import clamped


class LossKind(Enum):
    EXP = 'exp'
    LOG = 'log'

    @property
    def tag(self) -> str:
        return 'ExpL' if self is LossKind.EXP else 'LogL'

    @classmethod
    def parse(cls, value: Union[str, LossKind]) -> LossKind:
        if isinstance(value, LossKind):
            return value

        value = str(value).lower()
        for kind in cls:
            if value in (kind.value, kind.tag.lower()):
                return kind

        raise ContractViolation(f':[{value}]: Unknown loss, expected exp or log.')


def loss_value(kind: LossKind, margin):
    """`e^{-a}` for ExpL, `ln(1 + e^{-a})` for LogL (evaluated without overflow)."""
    margin = np.asarray(margin, dtype=np.float64)

    if kind is LossKind.EXP:
        value = np.exp(-margin)
    else:
        value = np.logaddexp(0.0, -margin)

    return value if value.ndim else float(value)


def loss_grad(kind: LossKind, margin):
    """Derivative of `loss_value` with respect to the margin."""
    margin = np.asarray(margin, dtype=np.float64)

    if kind is LossKind.EXP:
        value = -np.exp(-margin)
    else:
        value = -expit(-margin)

    return value if value.ndim else float(value)


def margin_targets(labels, class_count: int) -> Matrix:
    """The B x C sign matrix with +1 at each row's label and -1 elsewhere.

    Raises:
        - `ContractViolation` : a label outside `[0, class_count)`.
    """
    labels = np.asarray(labels, dtype=np.int64).reshape(-1)

    if labels.size and (labels.min() < 0 or labels.max() >= class_count):
        raise ContractViolation(f':[{labels.min()}, {labels.max()}]: Labels must lie in [0, {class_count}).')

    targets = -np.ones((labels.size, class_count))
    targets[np.arange(labels.size), labels] = 1.0

    return targets


def batch_risk(kind: LossKind, outputs: Matrix, labels) -> Tuple[float, Matrix]:
    """Mean surrogate loss of a score matrix and its exact gradient.

    Parameters:
        - `kind` : `LossKind`
        - `outputs` : `Matrix` (B x C)
        - `labels` : B class ids

    Returns:
        - (`float`, `Matrix` (B x C))

    Raises:
        - `ContractViolation` : empty batch, row count mismatch or a label `>= C`.
    """
    B, C = outputs.shape

    raiseif(
        B < 1,
        ContractViolation('Risk of an empty batch is undefined.')
    )
    raiseif(
        np.size(labels) != B,
        ContractViolation(f':[{np.size(labels)} != {B}]: One label per output row is required.')
    )

    targets = margin_targets(labels, C)
    margins = targets * outputs

    return float(np.mean(loss_value(kind, margins))), targets * loss_grad(kind, margins) / (B * C)


def psi_inverse_exp(theta: float) -> float:
    """`sqrt(1 - (1 - theta)^2)`, the exponential-loss link from surrogate to zero-one excess risk.

    Values above 1 are clamped to 1 with a `ParameterWarning`.

    Raises:
        - `ContractViolation` : `theta < 0` or NaN.
    """
    raiseif(
        not theta >= 0.0,
        ContractViolation(f':[{theta!r}]: psi inverse is defined on [0, 1].')
    )

    if theta > 1.0:
        clamped(theta, 1.0)
        theta = 1.0

    return float(np.sqrt(1.0 - (1.0 - theta) ** 2))
