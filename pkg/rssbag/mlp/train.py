"""Mini-batch gradient descent on the surrogate risk."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np

from .config import MlpConfig
from .model import MlpModel, Mode
from ..losses import LossKind, batch_risk
from ..numerics.matrix import Matrix
from ..numerics.rng import RngStream
from .._algae.exceptions import ContractViolation, NumericOverflow, TrainingDiverged
from .._algae.utils import raiseif
from .._algae.warnings import merged

logger = logging.getLogger(__name__)

# Child stream ids under the training stream.
INIT_STREAM, SHUFFLE_STREAM, DROPOUT_STREAM = 0, 1, 2


@dataclass
class TrainTrace:
    """Mean batch risk of every epoch, and the largest gradient norm actually applied."""
    risks: List[float] = field(default_factory=list)
    max_update_norm: float = 0.0

    @property
    def final_risk(self) -> float:
        return self.risks[-1] if self.risks else float('nan')


def batch_slices(n: int, batch_size: int, merge_singleton: bool) -> List[slice]:
    """Consecutive slices covering `range(n)`; a trailing single row is merged into the previous slice if asked."""
    slices = [slice(start, min(start + batch_size, n)) for start in range(0, n, batch_size)]

    if merge_singleton and len(slices) > 1 and slices[-1].stop - slices[-1].start == 1:
        slices[-2:] = [slice(slices[-2].start, n)]

    return slices


def global_norm(grads: List[np.ndarray]) -> float:
    return float(np.sqrt(sum(np.sum(g * g) for g in grads)))


def train(config: MlpConfig, features: Matrix, labels, kind: LossKind, rng: RngStream) -> Tuple[MlpModel, TrainTrace]:
    """Initializes a network from `rng` and fits it to `(features, labels)`.

    Parameters:
        - `config` : `MlpConfig`
        - `features` : `Matrix` (n x d)
        - `labels` : n class ids
        - `kind` : `LossKind`
        - `rng` : `RngStream`, the only source of randomness

    Returns:
        - (`MlpModel`, `TrainTrace`)

    Raises:
        - `ContractViolation` : fewer than two rows or mismatched inputs.
        - `TrainingDiverged` : a non-finite batch risk or activation, with its epoch and batch.
    """
    labels = np.asarray(labels, dtype=np.int64)
    n = features.shape[0]

    raiseif(
        n < 2 or labels.size != n,
        ContractViolation(f':[{n}, {labels.size}]: Training needs at least two rows with one label each.')
    )
    raiseif(
        features.ndim != 2 or features.shape[1] != config.input_dim,
        ContractViolation(f':[{features.shape}]: Expected {config.input_dim} feature columns.')
    )

    model = MlpModel.init(config, rng.child(INIT_STREAM))
    shuffle, dropout = rng.child(SHUFFLE_STREAM), rng.child(DROPOUT_STREAM)
    trace = TrainTrace()
    params = [value for _, value in model.parameters()]
    slices = batch_slices(n, config.batch_size, config.batch_norm)

    if config.epochs and len(slices) < -(-n // config.batch_size):
        merged('trailing single-row batch', 'the previous batch')

    for epoch in range(config.epochs):
        order = shuffle.permutation(n)
        risks = []

        for number, part in enumerate(slices):
            rows = order[part]
            try:
                outputs, cache = model.forward(features[rows], Mode.TRAIN, dropout)
            except NumericOverflow as error:
                raise TrainingDiverged(f':[epoch {epoch}, batch {number}]: Activations overflowed.', epoch, number) from error

            risk, grad_outputs = batch_risk(kind, outputs, labels[rows])

            if not np.isfinite(risk):
                raise TrainingDiverged(f':[epoch {epoch}, batch {number}]: Surrogate risk is not finite.', epoch, number)

            grads = model.backward(cache, grad_outputs)
            norm = global_norm(grads)

            if config.clip_norm is not None and norm > config.clip_norm:
                grads = [g * (config.clip_norm / norm) for g in grads]
                norm = global_norm(grads)

            for param, grad in zip(params, grads):
                param -= config.learning_rate * grad

            trace.max_update_norm = max(trace.max_update_norm, norm)
            risks.append(risk)

        trace.risks.append(float(np.mean(risks)))
        logger.debug('epoch %d risk %.6f', epoch, trace.risks[-1])

    return model, trace
