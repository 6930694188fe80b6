"""The results ledger: one CSV row per (dataset, method, repeat)."""
from __future__ import annotations

from dataclasses import astuple, dataclass
from pathlib import Path
from typing import Final, Iterable, List, Tuple, Union

import numpy as np
import pandas as pd

from .stats import RankTable, TTestResult, paired_t_one_sided
from .._algae.exceptions import ContractViolation, ParseError, StructuralError
from .._algae.utils import isprobability, raiseif

COLUMNS: Final[Tuple[str, ...]] = ('dataset', 'method', 'repeat', 'accuracy', 'macro_f1')
METRICS: Final[Tuple[str, ...]] = ('accuracy', 'macro_f1')


@dataclass(frozen=True)
class MetricRecord:
    dataset: str
    method: str
    repeat: int
    accuracy: float
    macro_f1: float

    def __post_init__(self):
        raiseif(
            not (isprobability(self.accuracy) and isprobability(self.macro_f1)),
            ContractViolation(f':[{self.accuracy!r}, {self.macro_f1!r}]: Metrics must lie in [0, 1].')
        )


def to_frame(records: Iterable[MetricRecord]) -> pd.DataFrame:
    return pd.DataFrame([astuple(record) for record in records], columns=list(COLUMNS))


def write_ledger(path: Union[str, Path], records: Iterable[MetricRecord]):
    """Writes records in the given order with round-trip exact decimals."""
    to_frame(records).to_csv(path, index=False, float_format='%.17g', lineterminator='\n')


def read_ledger(path: Union[str, Path]) -> pd.DataFrame:
    """Reads a ledger back with exact decimals, checking every row as a `MetricRecord`."""
    path = Path(path)

    raiseif(
        not path.is_file(),
        StructuralError(f':[{path}]: No such ledger.')
    )

    try:
        frame = pd.read_csv(path, dtype={'dataset': str, 'method': str}, float_precision='round_trip', encoding='utf-8')
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as error:
        raise StructuralError(f':[{path}]: Unreadable ledger; {error}') from error

    raiseif(
        tuple(frame.columns) != COLUMNS,
        StructuralError(f':[{", ".join(frame.columns)}]: Ledger header must be {",".join(COLUMNS)}.')
    )

    try:
        return to_frame(records_of(frame))
    except (TypeError, ValueError) as error:
        raise ParseError(f':[{path}]: Non-numeric ledger cell; {error}') from error


def records_of(frame: pd.DataFrame) -> List[MetricRecord]:
    return [MetricRecord(str(d), str(m), int(r), float(a), float(f)) for d, m, r, a, f in frame.itertuples(index=False)]


def rank_table(frame: pd.DataFrame, metric: str = 'accuracy') -> RankTable:
    """Mean `metric` per dataset (rows) and method (columns), ranked within each dataset."""
    raiseif(
        metric not in METRICS,
        ContractViolation(f':[{metric}]: Unknown metric, expected one of {", ".join(METRICS)}.')
    )

    means = frame.pivot_table(index='dataset', columns='method', values=metric, aggfunc='mean', sort=True)

    raiseif(
        means.isna().to_numpy().any(),
        StructuralError('Every method must have results on every dataset.')
    )

    return RankTable.from_values(means.to_numpy(), tuple(means.columns), tuple(means.index))


def compare_methods(frame: pd.DataFrame, a: str, b: str, metric: str = 'accuracy', alpha: float = 0.05) -> List[dict]:
    """One-sided paired t-test of method `a` over `b` on each dataset, pairing repeats by id."""
    rows = []

    for dataset, group in frame.groupby('dataset', sort=True):
        wide = group.pivot_table(index='repeat', columns='method', values=metric, aggfunc='mean')

        raiseif(
            a not in wide.columns or b not in wide.columns,
            StructuralError(f':[{dataset}]: Both {a} and {b} need results.')
        )

        paired = wide[[a, b]].dropna()
        result: TTestResult = paired_t_one_sided(paired[a].to_numpy(), paired[b].to_numpy(), alpha)
        rows.append({'dataset': dataset, 'a': a, 'b': b, 'metric': metric, 'n': int(len(paired)),
                     'mean_a': float(np.mean(paired[a])), 'mean_b': float(np.mean(paired[b])), **result.to_dict()})

    return rows
