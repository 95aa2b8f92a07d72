"""Distributional nearest-neighbour (DNN) and two-scale DNN (TDNN) regression.

The DNN estimator at a query point averages, over all size-``s`` subsamples,
the response of the subsample's nearest neighbour. Sorting the sample by
distance once turns it into an L-statistic: the ``i``-th closest response
carries weight ``C(n - i, s - 1) / C(n, s)``. TDNN combines two scales with
weights that cancel the leading bias term.

Observations used as kernel inputs are rows ``(x_1, ..., x_k, y)``.
"""

from __future__ import annotations

import math
import warnings
from collections.abc import Sequence
from dataclasses import dataclass
from statistics import NormalDist
from typing import Any

import numpy as np

from .errors import (
    DatasetTooSmallError,
    DimensionMismatchError,
    EqualScalesError,
    InvalidLevelError,
    InvalidOrderError,
)
from .jackknife import (
    EXACT,
    EstimatorFn,
    JackknifeReport,
    deletion_sets,
    jkd_from_values,
    jkd_variance,
)
from .ustat import Kernel


class ScaleRatioWarning(UserWarning):
    """s1/s2 falls outside the configured ratio guard, or s2 equals n."""


@dataclass(frozen=True)
class RegressionDataset:
    X: np.ndarray
    Y: np.ndarray

    def __post_init__(self) -> None:
        X = np.asarray(self.X, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        Y = np.asarray(self.Y, dtype=float).reshape(-1)
        if X.ndim != 2 or len(X) != len(Y):
            raise DimensionMismatchError(f"X has shape {X.shape} but Y has {len(Y)} entries")
        if len(Y) < 1 or X.shape[1] < 1:
            raise DatasetTooSmallError("a regression dataset needs n >= 1 and k >= 1")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(Y))):
            raise ValueError("regression data must be finite")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "Y", Y)

    def __len__(self) -> int:
        return len(self.Y)

    @property
    def k(self) -> int:
        return self.X.shape[1]

    def take_rows(self, ids: np.ndarray) -> RegressionDataset:
        return RegressionDataset(self.X[ids], self.Y[ids])

    def stacked(self) -> np.ndarray:
        """Observations as ``(n, k + 1)`` rows ``(x, y)``."""
        return np.column_stack([self.X, self.Y])

    @classmethod
    def from_stacked(cls, Z: np.ndarray) -> RegressionDataset:
        Z = np.asarray(Z, dtype=float)
        return cls(Z[:, :-1], Z[:, -1])


@dataclass(frozen=True)
class TdnnConfig:
    s1: int
    s2: int
    x: Sequence[float] | np.ndarray
    ratio_guard: float = 0.05

    def __post_init__(self) -> None:
        x = np.atleast_1d(np.asarray(self.x, dtype=float))
        object.__setattr__(self, "x", x)
        if self.s1 == self.s2:
            raise EqualScalesError(f"s1 = s2 = {self.s1}: the two-scale weights are undefined")
        if not 0 < self.s1 < self.s2:
            raise InvalidOrderError(f"need 0 < s1 < s2, got s1={self.s1}, s2={self.s2}")
        if not 0 < self.ratio_guard < 0.5:
            raise ValueError("ratio_guard must lie in (0, 1/2)")
        ratio = self.s1 / self.s2
        if not self.ratio_guard <= ratio <= 1 - self.ratio_guard:
            warnings.warn(
                f"s1/s2 = {ratio:.4g} outside [{self.ratio_guard}, {1 - self.ratio_guard}]",
                ScaleRatioWarning,
                stacklevel=2,
            )

    @property
    def k(self) -> int:
        return len(self.x)

    def check(self, n: int) -> None:
        """Validate against a sample of size ``n``."""
        if self.s2 > n:
            raise InvalidOrderError(f"s2 = {self.s2} exceeds n = {n}")
        if self.s2 == n:
            warnings.warn("s2 = n: the estimator is defined but s2 is not o(n)", ScaleRatioWarning, stacklevel=3)


def _query(x: Any, k: int) -> np.ndarray:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.shape != (k,):
        raise DimensionMismatchError(f"query point has shape {x.shape}, data has k = {k}")
    return x


def rank_order(x: Any, X: np.ndarray) -> np.ndarray:
    """0-based row indices sorted by distance to ``x``; ties keep the lower index first."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    x = _query(x, X.shape[1])
    dist2 = np.sum((X - x) ** 2, axis=1)
    return np.argsort(dist2, kind="stable")


def dnn_weights(n: int, s: int) -> np.ndarray:
    """L-statistic weights ``C(n - i, s - 1) / C(n, s)``, i = 1..n, by multiplicative recurrence."""
    if not 1 <= s <= n:
        raise InvalidOrderError(f"need 1 <= s <= n, got s={s}, n={n}")
    w = np.zeros(n)
    w[0] = s / n
    i = np.arange(1, n - s + 1, dtype=float)
    w[1 : n - s + 1] = (s / n) * np.cumprod((n - i - s + 1) / (n - i))
    return w


def _weighted(weights: np.ndarray, y_sorted: np.ndarray) -> float:
    # centred at the nearest response so that constant responses come back exactly
    ref = y_sorted[0]
    return float(ref + np.dot(weights, y_sorted - ref))


def dnn_estimate(x: Any, data: RegressionDataset, s: int) -> float:
    order = rank_order(x, data.X)
    return _weighted(dnn_weights(len(data), s), data.Y[order])


def dnn_kernel(x: Any, s: int) -> Kernel:
    """Order-``s`` kernel returning the response of the subsample's nearest neighbour to ``x``."""
    x = np.atleast_1d(np.asarray(x, dtype=float))

    def func(batch: np.ndarray) -> np.ndarray:
        dist2 = np.sum((batch[..., :-1] - x) ** 2, axis=-1)
        nearest = np.argmin(dist2, axis=1)
        return batch[np.arange(len(batch)), nearest, -1]

    return Kernel(s, func, vectorized=True, name=f"dnn-{s}")


def tdnn_weights(s1: int, s2: int, k: int) -> tuple[float, float]:
    """Bias-cancelling weights ``w1 = 1 / (1 - (s1/s2)^(-2/k))`` and ``w2 = 1 - w1``."""
    if s1 == s2:
        raise EqualScalesError(f"s1 = s2 = {s1}: the two-scale weights are undefined")
    if not 0 < s1 < s2:
        raise InvalidOrderError(f"need 0 < s1 < s2, got s1={s1}, s2={s2}")
    if k < 1:
        raise DimensionMismatchError(f"dimension k must be >= 1, got {k}")
    w1 = 1.0 / (1.0 - (s1 / s2) ** (-2.0 / k))
    return w1, 1.0 - w1


def _combined_weights(n: int, config: TdnnConfig) -> np.ndarray:
    w1, w2 = tdnn_weights(config.s1, config.s2, config.k)
    return w1 * dnn_weights(n, config.s1) + w2 * dnn_weights(n, config.s2)


def tdnn_estimate(x: Any, data: RegressionDataset, config: TdnnConfig) -> float:
    x = _query(x, data.k)
    config.check(len(data))
    order = rank_order(x, data.X)
    return _weighted(_combined_weights(len(data), config), data.Y[order])


def tdnn_kernel(x: Any, s1: int, s2: int) -> Kernel:
    """Order-``s2`` TDNN kernel: ``w1 * DNN_s1(x; D_s2) + w2 * Y_(1)`` on one subsample."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    w1, w2 = tdnn_weights(s1, s2, len(x))
    weights = w1 * dnn_weights(s2, s1)
    weights[0] += w2

    def func(batch: np.ndarray) -> np.ndarray:
        dist2 = np.sum((batch[..., :-1] - x) ** 2, axis=-1)
        order = np.argsort(dist2, axis=1, kind="stable")
        ys = np.take_along_axis(batch[..., -1], order, axis=1)
        return ys @ weights

    return Kernel(s2, func, vectorized=True, name=f"tdnn-{s1}-{s2}")


def tdnn_estimator(x: Any, config: TdnnConfig) -> EstimatorFn:
    """Generic estimator closure (full re-sort per call); the naive jackknife path."""

    def apply(data: RegressionDataset, ids: np.ndarray) -> float:
        return tdnn_estimate(x, data.take_rows(ids), config)

    return EstimatorFn(apply, min_n=config.s2, name="tdnn")


def _deleted_values(order: np.ndarray, y_sorted: np.ndarray, sets: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """TDNN value on every leave-out by incremental removal from the sorted order.

    After deleting ranks ``a_1 < ... < a_d`` a survivor of rank ``j`` with ``k``
    deleted ranks below it moves to rank ``j - k``, so the estimate splits into
    ``d + 1`` contiguous segments, each a difference of one prefix sum.
    """
    n = len(order)
    d = sets.shape[1]
    m = n - d
    rank_of = np.empty(n, dtype=np.int64)
    rank_of[order] = np.arange(1, n + 1)
    a = np.sort(rank_of[sets], axis=1)
    bounds = np.column_stack([np.zeros(len(a), dtype=np.int64), a, np.full(len(a), n + 1)])
    total = np.zeros(len(a))
    j = np.arange(1, n + 1)
    for k in range(d + 1):
        pos = j - k
        coef = np.where((pos >= 1) & (pos <= m), weights[np.clip(pos, 1, m) - 1], 0.0)
        prefix = np.concatenate([[0.0], np.cumsum(coef * y_sorted)])
        total += prefix[bounds[:, k + 1] - 1] - prefix[bounds[:, k]]
    return total


def tdnn_jackknife(
    x: Any,
    data: RegressionDataset,
    config: TdnnConfig,
    d: int = 1,
    mode: str = EXACT,
    *,
    B: int | None = None,
    seed: int = 0,
    budget: int = 10**6,
    naive: bool = False,
    workers: int = 1,
) -> JackknifeReport:
    """Delete-d jackknife variance of the TDNN estimate at ``x``.

    Deletion sets are the same as :func:`jackknife.jkd_variance` would use.
    The default path sorts once and removes points incrementally;
    ``naive=True`` re-sorts every replicate through the generic routine.
    """
    x = _query(x, data.k)
    n = len(data)
    if d < 1 or n - d < config.s2:
        raise DatasetTooSmallError(f"delete-{d} on n={n} leaves fewer than s2={config.s2} rows")
    if naive:
        return jkd_variance(
            tdnn_estimator(x, config), data, d, mode, B=B, seed=seed, budget=budget, workers=workers
        )
    estimate = tdnn_estimate(x, data, config)
    sets = deletion_sets(n, d, mode, B=B, seed=seed, budget=budget)
    order = rank_order(x, data.X)
    y_sorted = data.Y[order]
    ref = y_sorted[0]
    values = ref + _deleted_values(order, y_sorted - ref, sets, _combined_weights(n - d, config))
    return JackknifeReport(
        variance=jkd_from_values(estimate, values, n, d),
        d=d,
        replicates=len(sets),
        mode=mode,
        n=n,
        estimate=estimate,
        B=None if mode == EXACT else B,
        seed=None if mode == EXACT else seed,
    )


@dataclass(frozen=True)
class InferenceResult:
    estimate: float
    variance: float
    ci_lo: float
    ci_hi: float
    level: float

    def covers(self, value: float) -> bool:
        return self.ci_lo <= value <= self.ci_hi


def normal_quantile(p: float) -> float:
    return NormalDist().inv_cdf(p)


def studentized_ci(estimate: float, variance: float, level: float = 0.95) -> InferenceResult:
    """Normal interval ``estimate +/- z_{(1+level)/2} * sqrt(variance)``."""
    if not 0 < level < 1:
        raise InvalidLevelError(f"level must lie in (0, 1), got {level}")
    if not variance >= 0:
        raise InvalidLevelError(f"variance must be >= 0, got {variance}")
    half = normal_quantile((1 + level) / 2) * math.sqrt(variance)
    return InferenceResult(estimate, variance, estimate - half, estimate + half, level)
