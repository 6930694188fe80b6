"""Expectation and variance of the empirical surrogate risk under SRS and RSS.

An SRS estimator averages `phi` over K·m independent margins. An RSS
estimator runs m cycles; in each, group r contributes the r-th smallest of
K independent margins. Inside the lab the ranking score is the margin
itself, so group r contributes an exact copy of the order statistic `z_(r)`.

Exact results use the order-statistic law on a finite support,
`P(z_(r) <= t) = P(Binomial(K, F(t)) >= r)`. Monte Carlo results use
derived streams per chunk of trials so they do not depend on worker count.
"""
from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Final, List, Optional, Sequence

import numpy as np
from scipy.stats import binom

from .distribution import FiniteMarginDistribution
from ..concurrent.pool import TaskPool
from ..losses import LossKind, loss_value
from ..numerics.rng import RngStream
from ..sampling.sampler import SamplingKind
from .._algae.exceptions import ContractViolation, FormulaDomainError
from .._algae.utils import isint, raiseif

logger = logging.getLogger(__name__)

# Squared slope of phi between z = -1 and z = +1.
GAP_CONSTANTS: Final = {
    LossKind.EXP: ((math.e - 1.0 / math.e) / 2.0) ** 2,
    LossKind.LOG: 0.25,
}

DRAWS_PER_CHUNK: Final[int] = 1 << 21


@dataclass(frozen=True)
class ExactMoments:
    mean: float
    variance: float


@dataclass(frozen=True)
class MomentReport:
    """Monte Carlo moments of the empirical risk over `trials` independent estimators."""
    kind: SamplingKind
    loss: LossKind
    K: int
    m: int
    trials: int
    mean: float
    variance: float
    mean_se: float
    variance_se: float

    def to_dict(self) -> dict:
        value = asdict(self)
        value.update(kind=self.kind.value, loss=self.loss.tag)
        return value


@dataclass(frozen=True)
class GapReport:
    """`V_RSS - V_SRS`: closed form, exact enumeration and Monte Carlo estimate."""
    loss: LossKind
    K: int
    m: int
    distribution: dict
    order_stat_means: List[float]
    closed_form: Optional[float]
    exact: float
    srs: Optional[MomentReport] = None
    rss: Optional[MomentReport] = None
    mc_gap: Optional[float] = None
    mc_sigma: Optional[float] = None
    z_score: Optional[float] = None
    notes: List[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            'loss': self.loss.tag,
            'K': self.K,
            'm': self.m,
            'distribution': self.distribution,
            'order_stat_means': self.order_stat_means,
            'closed_form_gap': self.closed_form,
            'exact_gap': self.exact,
            'mc_gap': self.mc_gap,
            'mc_sigma': self.mc_sigma,
            'z_score': self.z_score,
            'srs': None if self.srs is None else self.srs.to_dict(),
            'rss': None if self.rss is None else self.rss.to_dict(),
            'notes': self.notes
        }


def _check_sizes(K: int, m: int = 1):
    raiseif(
        not isint(K) or K < 1 or not isint(m) or m < 1,
        ContractViolation(f':[K={K!r}, m={m!r}]: Set size and cycle count must be positive integers.')
    )


def order_stat_pmf(dist: FiniteMarginDistribution, K: int, r: int) -> np.ndarray:
    """Probability of each support point being the r-th smallest of K draws."""
    _check_sizes(K)
    raiseif(
        not 1 <= r <= K,
        ContractViolation(f':[r={r!r}]: Rank position must lie in 1..{K}.')
    )

    cdf = binom.sf(r - 1, K, dist.cdf)
    cdf[-1] = 1.0

    return np.diff(cdf, prepend=0.0)


def order_stat_pmfs(dist: FiniteMarginDistribution, K: int) -> np.ndarray:
    """`K x |support|` matrix whose row r-1 is `order_stat_pmf(dist, K, r)`."""
    return np.vstack([order_stat_pmf(dist, K, r) for r in range(1, K + 1)])


def exact_order_stat_means(dist: FiniteMarginDistribution, K: int) -> np.ndarray:
    """`E[z_(r)]` for r = 1..K."""
    return order_stat_pmfs(dist, K) @ dist.support


def exact_moments(kind: SamplingKind, loss: LossKind, dist: FiniteMarginDistribution, K: int, m: int) -> ExactMoments:
    """Exact mean and variance of the K·m-unit empirical risk."""
    _check_sizes(K, m)
    phi = loss_value(LossKind.parse(loss), dist.support)

    if SamplingKind.parse(kind) is SamplingKind.SRS:
        mean = float(np.dot(dist.probabilities, phi))
        second = float(np.dot(dist.probabilities, phi ** 2))
        return ExactMoments(mean, max(second - mean * mean, 0.0) / (K * m))

    pmfs = order_stat_pmfs(dist, K)
    means = pmfs @ phi
    variances = np.maximum(pmfs @ phi ** 2 - means ** 2, 0.0)

    return ExactMoments(float(means.mean()), float(variances.sum()) / (K * K * m))


def exact_gap(loss: LossKind, dist: FiniteMarginDistribution, K: int, m: int) -> float:
    """`V_RSS - V_SRS` written as `-(1/(Km)) [(1/K) sum_r (E phi(z_(r)))^2 - (E phi(z))^2]`."""
    _check_sizes(K, m)
    phi = loss_value(LossKind.parse(loss), dist.support)
    means = order_stat_pmfs(dist, K) @ phi
    overall = float(np.dot(dist.probabilities, phi))

    return -(float(np.mean(means ** 2)) - overall ** 2) / (K * m)


def closed_form_gap(kind: LossKind, K: int, m: int, dist: FiniteMarginDistribution) -> float:
    """`c * (1/(Km)) * [(E z)^2 - (1/K) sum_r (E z_(r))^2]` with `c = ((e - 1/e)/2)^2` (ExpL) or `1/4` (LogL).

    Raises:
        - `FormulaDomainError` : support outside {-1, +1}; use the exact or Monte Carlo gap instead.
    """
    _check_sizes(K, m)
    raiseif(
        not dist.is_sign(),
        FormulaDomainError(f':[{dist.support.tolist()}]: The closed form holds for margins in {{-1, +1}} only, use exact or Monte Carlo mode.')
    )

    means = exact_order_stat_means(dist, K)

    return GAP_CONSTANTS[LossKind.parse(kind)] / (K * m) * (dist.mean ** 2 - float(np.mean(means ** 2)))


def sample_estimators(kind: SamplingKind, loss: LossKind, dist: FiniteMarginDistribution, K: int, m: int,
                      trials: int, rng: RngStream) -> np.ndarray:
    """`trials` independent draws of the empirical risk."""
    phi = loss_value(loss, dist.support)
    n = len(dist)

    if kind is SamplingKind.SRS:
        draws = rng.choice(n, size=(trials, K * m), p=dist.probabilities)
        return phi[draws].mean(axis=1)

    draws = np.sort(rng.choice(n, size=(trials, m, K, K), p=dist.probabilities), axis=-1)
    kept = draws[..., np.arange(K), np.arange(K)]

    return phi[kept].reshape(trials, K * m).mean(axis=1)


def jackknife_se(values: np.ndarray) -> float:
    """Delete-one jackknife standard error of the unbiased sample variance."""
    n = values.size

    if n < 3:
        return 0.0

    x = values - values.mean()
    s1, s2 = x.sum(), np.dot(x, x)
    loo_mean = (s1 - x) / (n - 1)
    loo_var = (s2 - x * x - (n - 1) * loo_mean ** 2) / (n - 2)

    return float(np.sqrt((n - 1) / n * np.sum((loo_var - loo_var.mean()) ** 2)))


def mc_moments(kind: SamplingKind, loss: LossKind, dist: FiniteMarginDistribution, K: int, m: int, trials: int,
               rng: RngStream, workers: int = 1) -> MomentReport:
    """Monte Carlo mean and variance of the empirical risk with jackknife standard errors.

    Trials are split into fixed chunks; chunk i draws from `rng.child(i)`.
    """
    _check_sizes(K, m)
    raiseif(
        not isint(trials) or trials < 1,
        ContractViolation(f':[{trials!r}]: At least one trial is required.')
    )

    kind, loss = SamplingKind.parse(kind), LossKind.parse(loss)
    per_trial = K * m * (K if kind is SamplingKind.RSS else 1)
    chunk = max(DRAWS_PER_CHUNK // per_trial, 1)
    bounds = [(start, min(start + chunk, trials)) for start in range(0, trials, chunk)]

    def run(i: int) -> np.ndarray:
        start, stop = bounds[i]
        return sample_estimators(kind, loss, dist, K, m, stop - start, rng.child(i))

    with TaskPool(workers) as pool:
        estimators = np.concatenate(pool.map(run, range(len(bounds))))

    variance = float(estimators.var(ddof=1)) if trials > 1 else 0.0

    return MomentReport(kind, loss, K, m, trials, float(estimators.mean()), variance,
                        math.sqrt(variance / trials), jackknife_se(estimators))


def gap_report(loss: LossKind, dist: FiniteMarginDistribution, K: int, m: int, trials: int = 0,
               rng: RngStream = None, workers: int = 1) -> GapReport:
    """Everything known about `V_RSS - V_SRS` for one setting; Monte Carlo runs only when `trials > 0`.

    The closed form is omitted (with a note) when the support is not {-1, +1}.
    """
    loss = LossKind.parse(loss)
    notes = []

    try:
        closed = closed_form_gap(loss, K, m, dist)
    except FormulaDomainError as error:
        closed = None
        notes.append(str(error))

    report = dict(loss=loss, K=K, m=m, distribution=dist.to_dict(),
                  order_stat_means=exact_order_stat_means(dist, K).tolist(), closed_form=closed,
                  exact=exact_gap(loss, dist, K, m), notes=notes)

    if trials > 0:
        rng = rng or RngStream(0)
        srs = mc_moments(SamplingKind.SRS, loss, dist, K, m, trials, rng.child(0), workers)
        rss = mc_moments(SamplingKind.RSS, loss, dist, K, m, trials, rng.child(1), workers)
        gap = rss.variance - srs.variance
        sigma = math.hypot(rss.variance_se, srs.variance_se)
        target = closed if closed is not None else report['exact']
        z = (gap - target) / sigma if sigma > 0.0 else (0.0 if gap == target else math.inf)

        logger.info('K=%d m=%d %s: mc gap %.6g vs %.6g (z=%.2f)', K, m, loss.tag, gap, target, z)
        report.update(srs=srs, rss=rss, mc_gap=gap, mc_sigma=sigma, z_score=z)

    return GapReport(**report)


def decay_table(loss: LossKind, dist: FiniteMarginDistribution, K: int, ms: Sequence[int], trials: int,
                rng: RngStream, workers: int = 1) -> List[dict]:
    """Gap against cycle count m at fixed K; the closed form scales exactly as 1/m."""
    rows = []

    for i, m in enumerate(ms):
        report = gap_report(loss, dist, K, m, trials, rng.child(i), workers)
        rows.append({'m': m, 'N': K * m, 'closed_form_gap': report.closed_form, 'exact_gap': report.exact,
                     'mc_gap': report.mc_gap, 'mc_sigma': report.mc_sigma})

    return rows
