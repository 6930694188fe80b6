from __future__ import annotations

from dataclasses import asdict, dataclass, replace
from typing import Final, Optional, Tuple

from .._algae.exceptions import ContractViolation
from .._algae.utils import isint, raiseif

HIDDEN: Final[Tuple[int, ...]] = (256, 128)
LEARNING_RATE: Final[float] = 0.01
EPOCHS: Final[int] = 50
BATCH_SIZE: Final[int] = 32
BN_MOMENTUM: Final[float] = 0.9
BN_EPSILON: Final[float] = 1e-5

BASELINE_DROPOUT: Final[float] = 0.3
BASELINE_CLIP: Final[float] = 1.0


@dataclass(frozen=True)
class MlpConfig:
    """Shape, regularization switches and optimizer settings of one base network.

    Attributes:
        - `input_dim` : `int`
        - `output_dim` : `int`, number of classes
        - `hidden` : `Tuple[int, ...]` = (256, 128)
        - `batch_norm` : `bool` = `True`
        - `dropout` : `float` = 0.0, in [0, 1)
        - `clip_norm` : `float`, `None` = `None`, global gradient-norm cap
        - `learning_rate` : `float` = 0.01
        - `epochs` : `int` = 50
        - `batch_size` : `int` = 32
        - `seed` : `int` = 0
    """
    input_dim: int
    output_dim: int
    hidden: Tuple[int, ...] = HIDDEN
    batch_norm: bool = True
    dropout: float = 0.0
    clip_norm: Optional[float] = None
    learning_rate: float = LEARNING_RATE
    epochs: int = EPOCHS
    batch_size: int = BATCH_SIZE
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, 'hidden', tuple(int(h) for h in self.hidden))

        raiseif(
            not all(isint(v) and v > 0 for v in (self.input_dim, self.output_dim, *self.hidden)),
            ContractViolation(f':[{self.input_dim}, {self.hidden}, {self.output_dim}]: Layer widths must be positive.')
        )
        raiseif(
            not 0.0 <= self.dropout < 1.0,
            ContractViolation(f':[{self.dropout!r}]: Dropout rate must lie in [0, 1).')
        )
        raiseif(
            self.clip_norm is not None and not self.clip_norm > 0.0,
            ContractViolation(f':[{self.clip_norm!r}]: Clip norm must be positive.')
        )
        raiseif(
            not self.learning_rate > 0.0,
            ContractViolation(f':[{self.learning_rate!r}]: Learning rate must be positive.')
        )
        raiseif(
            not isint(self.epochs) or self.epochs < 0 or not isint(self.batch_size) or self.batch_size < 1,
            ContractViolation(f':[{self.epochs!r}, {self.batch_size!r}]: Invalid epoch count or batch size.')
        )
        raiseif(
            self.batch_norm and self.batch_size == 1,
            ContractViolation(':[batch_size=1]: Batch norm needs at least two rows per batch.')
        )

    @property
    def widths(self) -> Tuple[int, ...]:
        return (self.input_dim, *self.hidden, self.output_dim)

    def to_dict(self) -> dict:
        value = asdict(self)
        value['hidden'] = list(self.hidden)
        return value

    @classmethod
    def from_dict(cls, value: dict) -> MlpConfig:
        return cls(**{**value, 'hidden': tuple(value.get('hidden', HIDDEN))})

    def shaped(self, input_dim: int, output_dim: int) -> MlpConfig:
        return replace(self, input_dim=input_dim, output_dim=output_dim)


# Regularization variants compared against ranked set sampling.
BASELINES: Final[Tuple[str, ...]] = ('MLP', 'BN', 'DO', 'BN&DO', 'CGN')


def baseline_config(name: str, base: MlpConfig) -> MlpConfig:
    """`base` with the switches of a named baseline.

    `MLP` is the plain network, `BN` adds batch norm, `DO` dropout 0.3,
    `BN&DO` both and `CGN` a global gradient-norm clip of 1.0.
    """
    switches = {
        'MLP': dict(batch_norm=False, dropout=0.0, clip_norm=None),
        'BN': dict(batch_norm=True, dropout=0.0, clip_norm=None),
        'DO': dict(batch_norm=False, dropout=BASELINE_DROPOUT, clip_norm=None),
        'BN&DO': dict(batch_norm=True, dropout=BASELINE_DROPOUT, clip_norm=None),
        'CGN': dict(batch_norm=False, dropout=0.0, clip_norm=BASELINE_CLIP),
    }

    raiseif(
        name not in switches,
        ContractViolation(f':[{name}]: Unknown baseline, expected one of {", ".join(BASELINES)}.')
    )

    return replace(base, **switches[name])
