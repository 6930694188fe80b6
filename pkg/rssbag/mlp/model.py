"""Fully connected network with hand-written backpropagation.

Every hidden block is `linear -> batch norm -> ReLU -> dropout` (batch norm
and dropout switched by the config); the output block is a bare linear map
producing one raw score per class. Weights are stored `fan_in x fan_out` so
a batch `X` (B x d) maps to `X @ W + b`.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Final, List, Optional, Tuple, Union

import numpy as np

from .config import BN_EPSILON, BN_MOMENTUM, MlpConfig
from ..numerics.matrix import Matrix, matmul
from ..numerics.rng import RngStream
from .._algae.exceptions import ContractViolation, StructuralError
from .._algae.utils import raiseif

FORMAT_VERSION: Final[int] = 1


class Mode(Enum):
    TRAIN = 'train'
    EVAL = 'eval'


@dataclass
class DenseLayer:
    w: np.ndarray
    b: np.ndarray
    gamma: Optional[np.ndarray] = None
    beta: Optional[np.ndarray] = None
    run_mean: Optional[np.ndarray] = None
    run_var: Optional[np.ndarray] = None

    @property
    def normalized(self) -> bool:
        return self.gamma is not None

    def copy(self) -> DenseLayer:
        return DenseLayer(*(None if a is None else a.copy() for a in
                            (self.w, self.b, self.gamma, self.beta, self.run_mean, self.run_var)))

    def trainable(self) -> List[Tuple[str, np.ndarray]]:
        params = [('w', self.w), ('b', self.b)]
        if self.normalized:
            params += [('gamma', self.gamma), ('beta', self.beta)]

        return params

    def to_dict(self) -> dict:
        return {name: None if value is None else value.tolist() for name, value in
                (('w', self.w), ('b', self.b), ('gamma', self.gamma), ('beta', self.beta),
                 ('run_mean', self.run_mean), ('run_var', self.run_var))}

    @classmethod
    def from_dict(cls, value: dict) -> DenseLayer:
        return cls(*(None if value.get(name) is None else np.asarray(value[name], dtype=np.float64)
                     for name in ('w', 'b', 'gamma', 'beta', 'run_mean', 'run_var')))


@dataclass
class BlockCache:
    inputs: np.ndarray
    xhat: Optional[np.ndarray] = None
    inv_std: Optional[np.ndarray] = None
    active: Optional[np.ndarray] = None
    keep: Optional[np.ndarray] = None


@dataclass
class ForwardCache:
    blocks: List[BlockCache] = field(default_factory=list)


class MlpModel:
    """One base classifier: layer weights, batch-norm state and its config."""

    def __init__(self, config: MlpConfig, layers: List[DenseLayer]):
        raiseif(
            len(layers) != len(config.widths) - 1,
            ContractViolation(f':[{len(layers)}]: Expected {len(config.widths) - 1} layers.')
        )

        for i, (layer, fan_in, fan_out) in enumerate(zip(layers, config.widths, config.widths[1:])):
            raiseif(
                layer.w.shape != (fan_in, fan_out) or layer.b.shape != (fan_out,),
                ContractViolation(f':[layer {i}]: Weight shape {layer.w.shape} does not match ({fan_in}, {fan_out}).')
            )
            raiseif(
                layer.normalized and not np.all(layer.run_var > 0.0),
                ContractViolation(f':[layer {i}]: Running variance must be positive.')
            )

        self.__config = config
        self.__layers = layers

    def __eq__(self, other):
        return isinstance(other, MlpModel) and self.__config == other.config and all(
            all(np.array_equal(a, b) for (_, a), (_, b) in zip(mine.trainable() + self.__running(mine),
                                                              theirs.trainable() + self.__running(theirs)))
            for mine, theirs in zip(self.__layers, other.layers))

    def __repr__(self):
        return f'{MlpModel.__name__}[{" x ".join(map(str, self.__config.widths))}]'

    @classmethod
    def init(cls, config: MlpConfig, rng: RngStream) -> MlpModel:
        """Glorot-uniform weights, zero biases, `gamma = 1`, `beta = 0`."""
        layers = []
        last = len(config.widths) - 2

        for i, (fan_in, fan_out) in enumerate(zip(config.widths, config.widths[1:])):
            limit = np.sqrt(6.0 / (fan_in + fan_out))
            layer = DenseLayer(rng.uniform(-limit, limit, (fan_in, fan_out)), np.zeros(fan_out))

            if config.batch_norm and i < last:
                layer.gamma, layer.beta = np.ones(fan_out), np.zeros(fan_out)
                layer.run_mean, layer.run_var = np.zeros(fan_out), np.ones(fan_out)

            layers.append(layer)

        return cls(config, layers)

    @property
    def config(self) -> MlpConfig:
        return self.__config

    @property
    def layers(self) -> List[DenseLayer]:
        return self.__layers

    def copy(self) -> MlpModel:
        return MlpModel(self.__config, [layer.copy() for layer in self.__layers])

    def parameters(self) -> List[Tuple[str, np.ndarray]]:
        """Trainable arrays (by reference) named `<layer>.<param>`, in backward order of `backward`."""
        return [(f'{i}.{name}', value) for i, layer in enumerate(self.__layers) for name, value in layer.trainable()]

    def forward(self, batch: Matrix, mode: Mode = Mode.EVAL, rng: RngStream = None,
                update_stats: bool = True) -> Tuple[Matrix, ForwardCache]:
        """Maps a batch to raw class scores.

        Parameters:
            - `batch` : `Matrix` (B x d)
            - `mode` : `Mode` = `Mode.EVAL`
            - `rng` : `RngStream`, required for dropout in train mode
            - `update_stats` : `bool` = `True`, move running statistics in train mode

        Returns:
            - (`Matrix` (B x C), `ForwardCache`)

        Raises:
            - `ContractViolation` : width mismatch or a single-row batch in
              train mode with batch norm.
            - `NumericOverflow` : an activation overflowed.
        """
        config = self.__config
        training = mode is Mode.TRAIN

        raiseif(
            batch.ndim != 2 or batch.shape[1] != config.input_dim,
            ContractViolation(f':[{batch.shape}]: Expected batches of width {config.input_dim}.')
        )
        raiseif(
            training and config.batch_norm and batch.shape[0] < 2,
            ContractViolation(f':[{batch.shape[0]}]: Batch norm in train mode needs at least two rows.')
        )
        raiseif(
            training and config.dropout > 0.0 and rng is None,
            ContractViolation('Dropout in train mode needs a random stream.')
        )

        cache = ForwardCache()
        h = batch

        for layer in self.__layers[:-1]:
            block = BlockCache(h)
            z = matmul(h, layer.w) + layer.b

            if layer.normalized:
                if training:
                    mean, var = z.mean(axis=0), z.var(axis=0)

                    if update_stats:
                        layer.run_mean = BN_MOMENTUM * layer.run_mean + (1.0 - BN_MOMENTUM) * mean
                        layer.run_var = BN_MOMENTUM * layer.run_var + (1.0 - BN_MOMENTUM) * var
                else:
                    mean, var = layer.run_mean, layer.run_var

                block.inv_std = 1.0 / np.sqrt(var + BN_EPSILON)
                block.xhat = (z - mean) * block.inv_std
                z = layer.gamma * block.xhat + layer.beta

            block.active = z > 0.0
            h = np.where(block.active, z, 0.0)

            if training and config.dropout > 0.0:
                block.keep = (rng.random(h.shape) >= config.dropout) / (1.0 - config.dropout)
                h = h * block.keep

            cache.blocks.append(block)

        cache.blocks.append(BlockCache(h))

        return matmul(h, self.__layers[-1].w) + self.__layers[-1].b, cache

    def backward(self, cache: ForwardCache, grad_outputs: Matrix) -> List[np.ndarray]:
        """Gradients of a scalar loss for every array of `parameters()`, in the same order.

        `cache` must come from a train-mode `forward` (batch statistics).
        """
        grads = []
        delta = grad_outputs

        for layer, block in zip(reversed(self.__layers), reversed(cache.blocks)):
            if block is not cache.blocks[-1]:
                if block.keep is not None:
                    delta = delta * block.keep

                delta = np.where(block.active, delta, 0.0)

                if layer.normalized:
                    dgamma = np.sum(delta * block.xhat, axis=0)
                    dbeta = np.sum(delta, axis=0)
                    dxhat = delta * layer.gamma
                    B = dxhat.shape[0]
                    delta = block.inv_std / B * (B * dxhat - dxhat.sum(axis=0) - block.xhat * np.sum(dxhat * block.xhat, axis=0))
                    grads[0:0] = [dgamma, dbeta]

            grads[0:0] = [block.inputs.T @ delta, delta.sum(axis=0)]
            delta = delta @ layer.w.T

        return grads

    def predict_scores(self, features: Matrix) -> Matrix:
        return self.forward(features, Mode.EVAL)[0]

    def predict_labels(self, features: Matrix) -> np.ndarray:
        """Argmax class per row, ties going to the lowest class id."""
        return np.argmax(self.predict_scores(features), axis=1)

    def to_dict(self) -> dict:
        return {
            'version': FORMAT_VERSION,
            'config': self.__config.to_dict(),
            'batch_norm': {'momentum': BN_MOMENTUM, 'epsilon': BN_EPSILON},
            'layers': [layer.to_dict() for layer in self.__layers]
        }

    @classmethod
    def from_dict(cls, value: dict) -> MlpModel:
        raiseif(
            value.get('version') != FORMAT_VERSION,
            StructuralError(f':[{value.get("version")!r}]: Unsupported model format version.')
        )

        return cls(MlpConfig.from_dict(value['config']), [DenseLayer.from_dict(layer) for layer in value['layers']])

    def save(self, path: Union[str, Path]):
        Path(path).write_text(json.dumps(self.to_dict()), encoding='utf-8')

    @classmethod
    def load(cls, path: Union[str, Path]) -> MlpModel:
        return cls.from_dict(json.loads(Path(path).read_text(encoding='utf-8')))

    @staticmethod
    def __running(layer: DenseLayer) -> List[Tuple[str, np.ndarray]]:
        return [('run_mean', layer.run_mean), ('run_var', layer.run_var)] if layer.normalized else []
