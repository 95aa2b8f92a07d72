"""Delete-1 and delete-d jackknife variance estimators.

An estimator is evaluated as ``apply(data, ids)``: ``data`` is always the
full dataset and ``ids`` the original row indices retained in a replicate.
Passing the original indices lets randomized or subsampled estimators key
their internal randomness to the surviving rows instead of reshuffling it.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Any

import numpy as np

from .combinatorics import binom, combinations_array, unrank_subset
from .errors import BudgetExceededError, DatasetTooSmallError

EXACT = "exact"
SUBSAMPLED = "subsampled"
DEFAULT_DELETION_BUDGET = 10**6


def take_rows(data: Any, ids: np.ndarray) -> Any:
    """Rows ``ids`` of ``data`` (numpy arrays, or objects with ``take_rows``)."""
    if hasattr(data, "take_rows"):
        return data.take_rows(ids)
    return np.asarray(data)[ids]


@dataclass(frozen=True)
class EstimatorFn:
    """A real-valued estimator of a dataset, evaluated on retained rows."""

    apply: Callable[[Any, np.ndarray], float]
    min_n: int = 1
    name: str = "estimator"

    @classmethod
    def of(cls, fn: Callable[[Any], float], min_n: int = 1, name: str | None = None) -> EstimatorFn:
        """Wrap a plain function of the retained rows."""
        return cls(lambda data, ids: float(fn(take_rows(data, ids))), min_n, name or fn.__name__)

    def __call__(self, data: Any, ids: np.ndarray | None = None) -> float:
        if ids is None:
            ids = np.arange(len(data))
        return float(self.apply(data, ids))


@dataclass(frozen=True)
class JackknifeReport:
    variance: float
    d: int
    replicates: int
    mode: str
    n: int
    estimate: float
    B: int | None = None
    seed: int | None = None

    @property
    def approximate(self) -> bool:
        """Subsampled reports only approximate the delete-d sum."""
        return self.mode == SUBSAMPLED


def deletion_sets(
    n: int,
    d: int,
    mode: str = EXACT,
    *,
    B: int | None = None,
    seed: int = 0,
    budget: int = DEFAULT_DELETION_BUDGET,
) -> np.ndarray:
    """0-based deletion sets as rows of an ``(R, d)`` array.

    Exact mode lists all of ``L_{n,d}`` lexicographically; subsampled mode
    draws ``B`` distinct sets uniformly and returns them sorted by rank.
    """
    total = binom(n, d)
    if mode == EXACT:
        if total > budget:
            raise BudgetExceededError(f"C({n},{d}) = {total} deletion sets exceeds budget {budget}")
        return combinations_array(n, d).astype(np.int64)
    if mode != SUBSAMPLED:
        raise ValueError(f"unknown jackknife mode {mode!r}")
    if B is None or not 1 <= B <= total:
        raise ValueError(f"subsampled mode needs 1 <= B <= C({n},{d}) = {total}, got {B}")
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), n, d]))
    if total < 2**62:
        ranks = np.sort(rng.choice(total, size=B, replace=False))
        rows = [unrank_subset(n, d, int(r)) for r in ranks]
    else:
        picked: set[tuple[int, ...]] = set()
        while len(picked) < B:
            picked.add(tuple(sorted((rng.choice(n, size=d, replace=False) + 1).tolist())))
        rows = sorted(picked)
    return np.asarray(rows, dtype=np.int64).reshape(B, d) - 1


def jkd_from_values(
    estimate: float, replicate_values: Sequence[float] | np.ndarray, n: int, d: int
) -> float:
    """Delete-d variance from the full-sample value and replicate values.

    With all ``C(n, d)`` replicates this is exactly
    ``(n - d) / d * C(n, d)^-1 * sum (U_l - U)^2``; with ``B`` sampled
    replicates the sum is rescaled by ``C(n, d) / B``, which leaves the
    same ``(n - d) / (d * B)`` factor.
    """
    vals = np.asarray(replicate_values, dtype=float)
    factor = Fraction(n - d, d * len(vals))
    return float(factor) * math.fsum((vals - estimate) ** 2)


def jkd_variance(
    est: EstimatorFn,
    data: Any,
    d: int = 1,
    mode: str = EXACT,
    *,
    B: int | None = None,
    seed: int = 0,
    budget: int = DEFAULT_DELETION_BUDGET,
    workers: int = 1,
) -> JackknifeReport:
    """Delete-d jackknife variance of ``est`` on ``data``."""
    n = len(data)
    if d < 1 or n - d < est.min_n:
        raise DatasetTooSmallError(
            f"delete-{d} jackknife on n={n} leaves fewer than {est.min_n} rows"
        )
    sets = deletion_sets(n, d, mode, B=B, seed=seed, budget=budget)
    everything = np.arange(n)
    estimate = est(data, everything)

    def replicate(row: np.ndarray) -> float:
        return est(data, np.delete(everything, row))

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            values = list(pool.map(replicate, sets))
    else:
        values = [replicate(row) for row in sets]
    variance = jkd_from_values(estimate, values, n, d)
    return JackknifeReport(
        variance=variance,
        d=d,
        replicates=len(sets),
        mode=mode,
        n=n,
        estimate=estimate,
        B=None if mode == EXACT else B,
        seed=None if mode == EXACT else seed,
    )


def jk_variance(est: EstimatorFn, data: Any, *, workers: int = 1) -> JackknifeReport:
    """Delete-1 jackknife: ``(n - 1)/n * sum_i (U_(-i) - U)^2``."""
    return jkd_variance(est, data, 1, EXACT, workers=workers)
