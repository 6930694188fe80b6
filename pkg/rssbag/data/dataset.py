"""The dataset module defines the immutable `Dataset` every sampler draws from.

CSV files are read with `pandas` as text first so that every cell can be
validated and reported by its file position before it is converted.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Final, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from ..numerics.matrix import Matrix, as_matrix
from .._algae.exceptions import ContractViolation, ParseError, StructuralError
from .._algae.utils import isint, raiseif

LABEL_LAST: Final[int] = -1

PathType = Union[str, Path]


@dataclass(frozen=True)
class Dataset:
    """Feature matrix, integer class ids and metadata.

    Attributes:
        - `features` : `Matrix` (N x d)
        - `labels` : `ndarray[int64]` with values in `[0, class_count)`
        - `class_count` : `int`
        - `feature_names` : `Tuple[str, ...]`
        - `classes` : `Tuple[str, ...]` original label of each class id
        - `name` : `str`
    """
    features: Matrix
    labels: np.ndarray
    class_count: int
    feature_names: Tuple[str, ...] = ()
    classes: Tuple[str, ...] = ()
    name: str = 'dataset'

    def __post_init__(self):
        features = as_matrix(self.features, 'features')
        labels = np.asarray(self.labels, dtype=np.int64).reshape(-1)

        raiseif(
            features.shape[0] < 1,
            ContractViolation(f':[{self.name}]: A dataset needs at least one row.')
        )
        raiseif(
            labels.size != features.shape[0],
            ContractViolation(f':[{labels.size} != {features.shape[0]}]: Label and feature row counts differ.')
        )
        raiseif(
            not isint(self.class_count) or self.class_count < 1,
            ContractViolation(f':[{self.class_count!r}]: Class count must be a positive integer.')
        )
        raiseif(
            labels.min() < 0 or labels.max() >= self.class_count,
            ContractViolation(f':[{labels.min()}, {labels.max()}]: Class ids must lie in [0, {self.class_count}).')
        )

        features.setflags(write=False)
        labels.setflags(write=False)

        feature_names = tuple(self.feature_names) or tuple(f'x{j}' for j in range(features.shape[1]))
        classes = tuple(self.classes) or tuple(str(c) for c in range(self.class_count))

        raiseif(
            len(feature_names) != features.shape[1],
            ContractViolation(f':[{len(feature_names)}]: Expected {features.shape[1]} feature names.')
        )

        object.__setattr__(self, 'features', features)
        object.__setattr__(self, 'labels', labels)
        object.__setattr__(self, 'feature_names', feature_names)
        object.__setattr__(self, 'classes', classes)

    def __len__(self):
        return self.features.shape[0]

    @property
    def dim(self) -> int:
        return self.features.shape[1]

    def decode(self, labels: Sequence[int]) -> list:
        """Maps class ids back to the labels they were encoded from."""
        return [self.classes[int(label)] for label in labels]

    def subset(self, indices: Sequence[int], name: str = None) -> Dataset:
        """Rows at `indices` (repeats allowed), sharing this dataset's metadata."""
        indices = np.asarray(indices, dtype=np.int64)

        return Dataset(self.features[indices], self.labels[indices], self.class_count,
                       self.feature_names, self.classes, name or self.name)

    def with_features(self, features: Matrix) -> Dataset:
        return Dataset(features, self.labels, self.class_count, self.feature_names, self.classes, self.name)

    def to_csv(self, path: PathType):
        frame = pd.DataFrame(self.features, columns=list(self.feature_names))
        frame['label'] = self.decode(self.labels)
        frame.to_csv(path, index=False, float_format='%.17g')


@dataclass(frozen=True)
class Standardization:
    """Per-feature train statistics; zero-variance columns keep `std == 1`."""
    mean: np.ndarray
    std: np.ndarray

    def apply(self, dataset: Dataset) -> Dataset:
        return dataset.with_features(self.transform(dataset.features))

    def transform(self, features: Matrix) -> Matrix:
        raiseif(
            np.shape(features)[-1] != self.mean.size,
            ContractViolation(f':[{np.shape(features)}]: Expected {self.mean.size} feature columns.')
        )

        return (features - self.mean) / self.std

    def to_dict(self) -> dict:
        return {'mean': self.mean.tolist(), 'std': self.std.tolist()}

    @classmethod
    def from_dict(cls, value: dict) -> Standardization:
        return cls(np.asarray(value['mean'], dtype=np.float64), np.asarray(value['std'], dtype=np.float64))


def encode_labels(raw: Sequence[str]) -> Tuple[np.ndarray, Tuple[str, ...]]:
    """Encodes labels as class ids.

    Integer labels are coded by ascending value, anything else by order of
    first appearance.
    """
    raw = [value.strip() for value in raw]

    try:
        classes = [str(value) for value in sorted({int(value) for value in raw})]
        lookup = {str(int(value)): code for code, value in enumerate(classes)}
        return np.array([lookup[str(int(value))] for value in raw], dtype=np.int64), tuple(classes)
    except ValueError:
        pass

    lookup = {}
    for value in raw:
        lookup.setdefault(value, len(lookup))

    return np.array([lookup[value] for value in raw], dtype=np.int64), tuple(lookup)


def _read_cells(path: Path) -> pd.DataFrame:
    raiseif(
        not path.is_file(),
        StructuralError(f':[{path}]: No such file.')
    )

    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, encoding='utf-8')
    except pd.errors.ParserError as error:
        raise StructuralError(f':[{path}]: Ragged rows; {error}') from error
    except pd.errors.EmptyDataError as error:
        raise StructuralError(f':[{path}]: File is empty.') from error
    except UnicodeDecodeError as error:
        raise ParseError(f':[{path}]: Not valid UTF-8 text at byte {error.start}.') from error

    raiseif(
        frame.shape[0] == 0,
        StructuralError(f':[{path}]: Expected a header and at least one data row.')
    )

    if frame.isna().to_numpy().any():
        row = int(np.flatnonzero(frame.isna().to_numpy().any(axis=1))[0])
        raise StructuralError(f':[{path}]: Ragged row at line {row + 2}, expected {frame.shape[1]} cells.')

    return frame


def _numeric(cells: pd.DataFrame) -> Matrix:
    try:
        values = np.asarray(cells.to_numpy(dtype=object), dtype=np.float64)
    except ValueError:
        values = cells.apply(pd.to_numeric, errors='coerce').to_numpy(dtype=np.float64)

    bad = ~np.isfinite(values)

    if bad.any():
        row, col = map(int, np.argwhere(bad)[0])
        raise ParseError(f':[{cells.iat[row, col]!r}]: Non-numeric feature cell at line {row + 2}, column {cells.columns[col]!r}.')

    return values


def _label_position(columns: list, label_column: int, path: Path) -> int:
    label_at = label_column if label_column >= 0 else len(columns) + label_column

    raiseif(
        not 0 <= label_at < len(columns),
        StructuralError(f':[{label_column}]: Label column outside the {len(columns)} columns of {path}.')
    )

    return label_at


def load_csv(path: PathType, label_column: int = LABEL_LAST, name: str = None) -> Dataset:
    """Loads a headed, comma-separated file into a `Dataset`.

    Parameters:
        - `path` : `str`, `Path`
        - `label_column` : `int` = -1, position of the label column (negative counts from the end)
        - `name` : `str` = file stem

    Raises:
        - `StructuralError` : missing file, no data rows or ragged rows.
        - `ParseError` : a feature cell that is not a decimal real, naming its row and column.
    """
    path = Path(path)
    frame = _read_cells(path)

    raiseif(
        frame.shape[1] < 2,
        StructuralError(f':[{path}]: Expected at least one feature column and a label column.')
    )

    columns = list(frame.columns)
    label_at = _label_position(columns, label_column, path)
    feature_columns = [column for j, column in enumerate(columns) if j != label_at]
    features = _numeric(frame[feature_columns])
    labels, classes = encode_labels(frame[columns[label_at]].tolist())

    return Dataset(features, labels, len(classes),
                   tuple(str(column) for column in feature_columns), classes, name or path.stem)


def load_features(path: PathType, width: int, label_column: int = LABEL_LAST) -> Matrix:
    """Feature rows of a headed CSV with `width` columns, or `width + 1` when it still carries labels.

    Raises:
        - `StructuralError` : any other column count.
    """
    path = Path(path)
    frame = _read_cells(path)
    columns = list(frame.columns)

    if len(columns) == width + 1:
        label_at = _label_position(columns, label_column, path)
        columns = [column for j, column in enumerate(columns) if j != label_at]

    raiseif(
        len(columns) != width,
        StructuralError(f':[{path}]: Expected {width} feature columns, found {frame.shape[1]} columns.')
    )

    return _numeric(frame[columns])


def standardize(train: Dataset, test: Optional[Dataset] = None) -> Tuple[Dataset, Optional[Dataset], Standardization]:
    """Centers and scales features with the population statistics of `train`.

    `test` is transformed with the train statistics, never its own.
    """
    mean = train.features.mean(axis=0)
    std = train.features.std(axis=0)
    std = np.where(std > 0.0, std, 1.0)
    scaler = Standardization(mean, std)

    return scaler.apply(train), scaler.apply(test) if test is not None else None, scaler
