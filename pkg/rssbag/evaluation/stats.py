"""Significance tests for comparing methods across repeats and datasets.

Student-t and F quantiles come from `scipy.stats`, which inverts the
regularized incomplete beta function, so any sample size is supported.
The Nemenyi critical values are the finite studentized-range table divided
by sqrt(2).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Final, List, Sequence

import numpy as np
from scipy import stats as scistats

from ..numerics.ranks import average_ranks
from .._algae.exceptions import ContractViolation
from .._algae.utils import raiseif

NEMENYI_Q: Final[Dict[float, Dict[int, float]]] = {
    0.05: {2: 1.960, 3: 2.343, 4: 2.569, 5: 2.728, 6: 2.850, 7: 2.949, 8: 3.031, 9: 3.102, 10: 3.164},
    0.10: {2: 1.645, 3: 2.052, 4: 2.291, 5: 2.459, 6: 2.589, 7: 2.693, 8: 2.780, 9: 2.855, 10: 2.920},
}


@dataclass(frozen=True)
class RankTable:
    """Mean metric of k methods on n datasets with per-dataset ranks (1 = best, ties averaged)."""
    values: np.ndarray
    ranks: np.ndarray
    methods: tuple
    datasets: tuple

    @classmethod
    def from_values(cls, values, methods: Sequence[str] = (), datasets: Sequence[str] = (),
                    higher_is_better: bool = True) -> RankTable:
        values = np.asarray(values, dtype=np.float64)

        raiseif(
            values.ndim != 2,
            ContractViolation(f':[{values.shape}]: A rank table needs an n x k matrix.')
        )

        signed = -values if higher_is_better else values
        ranks = np.vstack([average_ranks(row) for row in signed])
        n, k = values.shape

        return cls(values, ranks, tuple(methods) or tuple(f'm{j}' for j in range(k)),
                   tuple(datasets) or tuple(f'd{i}' for i in range(n)))

    @classmethod
    def from_ranks(cls, ranks, methods: Sequence[str] = (), datasets: Sequence[str] = ()) -> RankTable:
        ranks = np.asarray(ranks, dtype=np.float64)
        return cls.from_values(ranks, methods, datasets, higher_is_better=False)

    @property
    def mean_ranks(self) -> np.ndarray:
        return self.ranks.mean(axis=0)

    @property
    def shape(self):
        return self.ranks.shape


@dataclass(frozen=True)
class TTestResult:
    t: float
    significant: bool
    critical: float
    p_value: float
    degenerate: bool = False

    def to_dict(self) -> dict:
        return {'t': self.t, 'significant': self.significant, 'critical': self.critical,
                'p_value': self.p_value, 'degenerate': self.degenerate}


@dataclass(frozen=True)
class FriedmanResult:
    chi2: float
    tau_f: float
    infinite: bool
    critical: float
    p_value: float

    def to_dict(self) -> dict:
        return {'chi2_f': self.chi2, 'tau_f': None if self.infinite else self.tau_f, 'tau_f_infinite': self.infinite,
                'critical': self.critical, 'p_value': self.p_value}


def paired_t_one_sided(a: Sequence[float], b: Sequence[float], alpha: float = 0.05) -> TTestResult:
    """One-sided paired t-test of `H1: mean(a - b) > 0`.

    Constant differences are degenerate: significant exactly when the common difference is positive.
    """
    a, b = np.asarray(a, dtype=np.float64), np.asarray(b, dtype=np.float64)

    raiseif(
        a.shape != b.shape or a.ndim != 1 or a.size < 2,
        ContractViolation(f':[{a.shape}, {b.shape}]: Paired samples must be equally long with at least two pairs.')
    )
    raiseif(
        not 0.0 < alpha < 1.0,
        ContractViolation(f':[{alpha!r}]: Significance level must lie in (0, 1).')
    )

    diff = a - b
    n = diff.size
    critical = float(scistats.t.ppf(1.0 - alpha, n - 1))
    sd = diff.std(ddof=1)

    if sd == 0.0 or np.allclose(diff, diff[0], rtol=0.0, atol=1e-15):
        mean = float(diff[0])
        t = math.copysign(math.inf, mean) if mean != 0.0 else 0.0
        return TTestResult(t, mean > 0.0, critical, 0.0 if mean > 0.0 else 1.0, True)

    t = float(diff.mean() / (sd / math.sqrt(n)))

    return TTestResult(t, t > critical, critical, float(scistats.t.sf(t, n - 1)))


def f_critical(k: int, n: int, alpha: float = 0.05) -> float:
    """Upper `alpha` quantile of `F(k - 1, (k - 1)(n - 1))`, the reference for `tau_F`."""
    return float(scistats.f.ppf(1.0 - alpha, k - 1, (k - 1) * (n - 1)))


def friedman_tau_f(table: RankTable, alpha: float = 0.05) -> FriedmanResult:
    """Friedman chi-square and its Iman-Davenport F correction `tau_F`.

    A non-positive denominator in `tau_F` is reported with `infinite = True`.
    """
    n, k = table.shape

    raiseif(
        n < 2 or k < 2,
        ContractViolation(f':[n={n}, k={k}]: Friedman needs at least two datasets and two methods.')
    )

    mean_ranks = table.mean_ranks
    chi2 = 12.0 * n / (k * (k + 1)) * (np.sum(mean_ranks ** 2) - k * (k + 1) ** 2 / 4.0)
    chi2 = max(float(chi2), 0.0) if abs(chi2) > 1e-12 else 0.0
    denominator = n * (k - 1) - chi2

    if denominator <= 0.0:
        return FriedmanResult(chi2, math.inf, True, f_critical(k, n, alpha), 0.0)

    tau_f = (n - 1) * chi2 / denominator

    return FriedmanResult(chi2, tau_f, False, f_critical(k, n, alpha),
                          float(scistats.f.sf(tau_f, k - 1, (k - 1) * (n - 1))))


def nemenyi_cd(k: int, n: int, alpha: float = 0.05) -> float:
    """Critical difference `q_alpha(k) * sqrt(k(k+1) / (6n))` of mean ranks.

    Raises:
        - `ContractViolation` : `alpha` not in {0.05, 0.10}, `k` outside 2..10 or `n < 1`.
    """
    raiseif(
        alpha not in NEMENYI_Q,
        ContractViolation(f':[{alpha!r}]: Nemenyi table covers alpha 0.05 and 0.10 only.')
    )
    raiseif(
        k not in NEMENYI_Q[alpha],
        ContractViolation(f':[{k!r}]: Nemenyi table covers 2 to 10 methods.')
    )
    raiseif(
        n < 1,
        ContractViolation(f':[{n!r}]: At least one dataset is required.')
    )

    return NEMENYI_Q[alpha][k] * math.sqrt(k * (k + 1) / (6.0 * n))


def cd_diagram(table: RankTable, alpha: float = 0.05) -> List[dict]:
    """Plot-ready rows `{method, mean_rank, cd}` sorted best first."""
    n, k = table.shape
    cd = nemenyi_cd(k, n, alpha)

    return sorted(({'method': method, 'mean_rank': float(rank), 'cd': cd}
                   for method, rank in zip(table.methods, table.mean_ranks)), key=lambda row: row['mean_rank'])
