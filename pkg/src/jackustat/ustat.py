"""Generalized U-statistics: complete, Bernoulli-incomplete and Horvitz-Thompson.

A dataset is a numpy array whose first axis indexes observations. Subsamples
are identified by their sorted tuple of *original* row indices; both the
Bernoulli selection keys and the kernel randomization are pure functions of
that tuple and a seed. Evaluating the statistic on a subset of the rows (a
jackknife replicate) therefore reuses exactly the selection and randomness
the surviving subsamples had in the full evaluation.
"""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

import numpy as np

from .combinatorics import binom, combinations_array
from .errors import BudgetExceededError, EmptySelectionError, InvalidOrderError
from .jackknife import EstimatorFn
from .streams import keyed_uniform, tuple_rng

DEFAULT_BUDGET = 10**7

COMPLETE = "complete"
BERNOULLI = "bernoulli"
HORVITZ_THOMPSON = "ht"


@dataclass(frozen=True)
class Kernel:
    """Permutation-symmetric kernel of a fixed order.

    ``func`` is called as ``func(points)`` for deterministic kernels and
    ``func(points, rng)`` for randomized ones, where ``points`` stacks the
    ``order`` observations along axis 0 and ``rng`` is the subsample's own
    generator (its omega). A ``vectorized`` kernel instead receives a batch of
    shape ``(N, order, ...)`` and returns ``N`` values; randomized kernels
    cannot be vectorized.
    """

    order: int
    func: Callable[..., Any]
    randomized: bool = False
    vectorized: bool = False
    name: str = "kernel"

    def __post_init__(self) -> None:
        if self.order < 1:
            raise InvalidOrderError(f"kernel order must be >= 1, got {self.order}")
        if self.randomized and self.vectorized:
            raise ValueError("randomized kernels are evaluated one subsample at a time")

    def __call__(self, points: np.ndarray, rng: np.random.Generator | None = None) -> float:
        points = np.asarray(points)
        if self.vectorized:
            return float(self.func(points[None])[0])
        if self.randomized:
            if rng is None:
                raise ValueError(f"randomized kernel {self.name!r} needs an rng")
            return float(self.func(points, rng))
        return float(self.func(points))

    def evaluate_batch(
        self, batch: np.ndarray, keys: np.ndarray | None = None, omega_seed: int = 0
    ) -> np.ndarray:
        """Kernel values for a batch ``(N, order, ...)``.

        ``keys`` are the original index tuples, used only to key omega.
        """
        batch = np.asarray(batch)
        if self.vectorized:
            return np.asarray(self.func(batch), dtype=float).reshape(len(batch))
        out = np.empty(len(batch))
        if self.randomized:
            if keys is None:
                raise ValueError("randomized kernels need index keys for omega")
            for r, (pts, key) in enumerate(zip(batch, keys)):
                out[r] = self.func(pts, tuple_rng(omega_seed, key))
        else:
            for r, pts in enumerate(batch):
                out[r] = self.func(pts)
        return out


def fix_omega(kernel: Kernel, seed: int | list[int]) -> Kernel:
    """Deterministic kernel that always evaluates ``kernel`` under one fixed omega."""
    if not kernel.randomized:
        return kernel
    seq = np.random.SeedSequence(seed)

    def fixed(points: np.ndarray) -> float:
        return kernel.func(points, np.random.default_rng(seq))

    return Kernel(kernel.order, fixed, name=f"{kernel.name}|fixed-omega")


def mean_kernel() -> Kernel:
    return Kernel(1, lambda b: b[:, 0], vectorized=True, name="mean")


def variance_kernel(order: int = 2) -> Kernel:
    """Unbiased sample variance of the ``order`` points; order 2 gives (z1 - z2)^2 / 2."""
    if order < 2:
        raise InvalidOrderError("variance kernel needs order >= 2")
    return Kernel(order, lambda b: np.var(b, axis=1, ddof=1), vectorized=True, name="variance")


def product_kernel(order: int = 2) -> Kernel:
    return Kernel(order, lambda b: np.prod(b, axis=1), vectorized=True, name="product")


def constant_kernel(value: float, order: int = 1) -> Kernel:
    return Kernel(order, lambda b: np.full(len(b), float(value)), vectorized=True, name="constant")


def sign_flip_kernel(order: int = 2, p_plus: float = 0.75) -> Kernel:
    """Randomized kernel ``omega * sum(points)`` with ``omega = +1`` w.p. ``p_plus``, else -1."""

    def func(points: np.ndarray, rng: np.random.Generator) -> float:
        sign = 1.0 if rng.random() < p_plus else -1.0
        return sign * float(np.sum(points))

    return Kernel(order, func, randomized=True, name="sign-flip")


@dataclass(frozen=True)
class SamplingPlan:
    """How subsamples enter the statistic.

    ``target_n`` is the expected number of selected subsamples N; the
    Bernoulli inclusion probability is ``p = N / C(n, s)``.
    """

    mode: str = COMPLETE
    target_n: float | None = None

    def __post_init__(self) -> None:
        if self.mode not in (COMPLETE, BERNOULLI, HORVITZ_THOMPSON):
            raise ValueError(f"unknown sampling mode {self.mode!r}")
        if self.mode != COMPLETE and (self.target_n is None or self.target_n <= 0):
            raise ValueError(f"{self.mode} sampling needs a positive target_n")

    @classmethod
    def complete(cls) -> SamplingPlan:
        return cls(COMPLETE)

    @classmethod
    def bernoulli(cls, target_n: float) -> SamplingPlan:
        return cls(BERNOULLI, float(target_n))

    @classmethod
    def horvitz_thompson(cls, target_n: float) -> SamplingPlan:
        return cls(HORVITZ_THOMPSON, float(target_n))

    def inclusion_probability(self, n: int, s: int) -> float:
        if self.mode == COMPLETE:
            return 1.0
        return float(Fraction(self.target_n) / binom(n, s))


@dataclass(frozen=True)
class UStatResult:
    value: float
    selected: int
    plan: SamplingPlan
    seed: int | None
    empty: bool = False


@dataclass
class _Design:
    """Candidate subsamples of a universe of ``n`` rows with their selection keys."""

    n: int
    tuples: np.ndarray
    keys: np.ndarray
    enumerated: bool
    values: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        self.values = np.full(len(self.tuples), np.nan)


class UStatistic:
    """A generalized U-statistic with a fixed kernel, sampling plan and seeds.

    ``deletion`` controls what happens to the Bernoulli selection when the
    statistic is evaluated on a subset of the rows:

    ``"fixed"``
        each subsample keeps the selection indicator it had in the full
        data, the inclusion probability stays at ``N / C(n, s)``, and the
        Horvitz-Thompson normalizer becomes ``p * C(m, s)`` for ``m`` rows.
    ``"recompute"``
        the inclusion probability becomes ``N / C(m, s)`` (so N is preserved
        in expectation) and selections are coupled through the keyed
        uniforms. ``max_deleted`` bounds how many rows may be removed.
    """

    def __init__(
        self,
        kernel: Kernel,
        plan: SamplingPlan | None = None,
        *,
        seed: int = 0,
        omega_seed: int | None = None,
        budget: int = DEFAULT_BUDGET,
        deletion: str = "fixed",
        max_deleted: int = 0,
    ):
        if deletion not in ("fixed", "recompute"):
            raise ValueError(f"unknown deletion rule {deletion!r}")
        self.kernel = kernel
        self.plan = plan or SamplingPlan.complete()
        self.seed = int(seed)
        self.omega_seed = self.seed if omega_seed is None else int(omega_seed)
        self.budget = int(budget)
        self.deletion = deletion
        self.max_deleted = int(max_deleted)
        self._bound: tuple[Any, _Design] | None = None

    @property
    def order(self) -> int:
        return self.kernel.order

    def _pool_probability(self, n: int) -> float:
        s = self.order
        p_full = self.plan.inclusion_probability(n, s)
        if self.plan.mode == COMPLETE:
            return 1.0
        if not 0.0 < p_full <= 1.0:
            raise ValueError(
                f"target_n={self.plan.target_n} gives p={p_full} outside (0, 1] for C({n},{s})"
            )
        if self.deletion == "fixed":
            return p_full
        m_min = max(s, n - self.max_deleted)
        return min(1.0, float(Fraction(self.plan.target_n) / binom(m_min, s)))

    def _build_design(self, n: int) -> _Design:
        s = self.order
        if s > n:
            raise InvalidOrderError(f"kernel order {s} exceeds sample size {n}")
        total = binom(n, s)
        q = self._pool_probability(n)
        if total <= self.budget:
            tuples = combinations_array(n, s)
            if self.plan.mode == COMPLETE:
                return _Design(n, tuples, np.zeros(total), True)
            keys = keyed_uniform(self.seed, tuples)
            keep = keys < q
            return _Design(n, tuples[keep], keys[keep], True)
        if self.plan.mode == COMPLETE:
            raise BudgetExceededError(
                f"C({n},{s}) = {total} subsets exceeds the budget of {self.budget}"
            )
        rng = np.random.default_rng(np.random.SeedSequence([self.seed, n, s, 0x5EED]))
        if total < 2**62:
            count = int(rng.binomial(total, q))
        else:
            # Binomial(total, q) with q < 1e-10 here; Poisson is within q in total variation.
            count = int(rng.poisson(total * q))
        if count > self.budget:
            raise BudgetExceededError(f"{count} selected subsamples exceeds the budget")
        chosen: set[tuple[int, ...]] = set()
        while len(chosen) < count:
            chosen.add(tuple(sorted(rng.choice(n, size=s, replace=False).tolist())))
        tuples = np.array(sorted(chosen), dtype=np.int64).reshape(count, s)
        keys = rng.uniform(0.0, q, size=count)
        return _Design(n, tuples, keys, False)

    def design_for(self, data: Any) -> _Design:
        if self._bound is None or self._bound[0] is not data:
            self._bound = (data, self._build_design(len(data)))
        return self._bound[1]

    def evaluate(self, data: Any, ids: np.ndarray | None = None) -> UStatResult:
        """Value of the statistic on ``data`` restricted to the rows ``ids``."""
        design = self.design_for(data)
        n, s = design.n, self.order
        if ids is None:
            m = n
            surviving = np.ones(len(design.tuples), dtype=bool)
        else:
            ids = np.asarray(ids, dtype=np.int64)
            m = len(ids)
            alive = np.zeros(n, dtype=bool)
            alive[ids] = True
            surviving = alive[design.tuples].all(axis=1)
        if m < s:
            raise InvalidOrderError(f"kernel order {s} exceeds sample size {m}")
        mode = self.plan.mode
        p_used = 1.0
        if mode != COMPLETE:
            if self.deletion == "recompute":
                if n - m > self.max_deleted:
                    raise ValueError(f"{n - m} rows removed but max_deleted={self.max_deleted}")
                p_used = float(Fraction(self.plan.target_n) / binom(m, s))
                surviving &= design.keys < p_used
            else:
                p_used = self.plan.inclusion_probability(n, s)
        sel = np.flatnonzero(surviving)
        vals = self._values(data, design, sel)
        n_hat = len(sel)
        total = math.fsum(vals)
        if mode == COMPLETE:
            return UStatResult(total / binom(m, s), n_hat, self.plan, self.seed)
        if mode == BERNOULLI:
            if n_hat == 0:
                raise EmptySelectionError("no subsample selected; retry with another seed")
            return UStatResult(total / n_hat, n_hat, self.plan, self.seed)
        if self.deletion == "recompute":
            denom = float(self.plan.target_n)
        else:
            denom = float(Fraction(self.plan.target_n) * binom(m, s) / binom(n, s))
        return UStatResult(total / denom, n_hat, self.plan, self.seed, empty=n_hat == 0)

    def _values(self, data: Any, design: _Design, sel: np.ndarray) -> np.ndarray:
        missing = sel[np.isnan(design.values[sel])]
        if len(missing):
            keys = design.tuples[missing]
            batch = np.asarray(data)[keys]
            design.values[missing] = self.kernel.evaluate_batch(batch, keys, self.omega_seed)
        return design.values[sel]

    def __call__(self, data: Any, ids: np.ndarray | None = None) -> float:
        return self.evaluate(data, ids).value

    def estimator(self) -> EstimatorFn:
        """View as a jackknife estimator (keeps selection and omega keyed by original rows)."""
        return EstimatorFn(self.__call__, min_n=self.order, name=f"U[{self.kernel.name}]")


def eval_complete(
    kernel: Kernel, data: Any, omega_seed: int = 0, *, budget: int = DEFAULT_BUDGET
) -> UStatResult:
    """Complete U-statistic: average of the kernel over every ``s``-subset."""
    return UStatistic(kernel, SamplingPlan.complete(), seed=omega_seed, budget=budget).evaluate(data)


def eval_incomplete(
    kernel: Kernel,
    data: Any,
    target_n: float,
    rng_seed: int = 0,
    *,
    omega_seed: int | None = None,
    budget: int = DEFAULT_BUDGET,
) -> UStatResult:
    """Bernoulli-sampled U-statistic normalized by the realized count N-hat."""
    stat = UStatistic(
        kernel, SamplingPlan.bernoulli(target_n), seed=rng_seed, omega_seed=omega_seed, budget=budget
    )
    return stat.evaluate(data)


def eval_ht(
    kernel: Kernel,
    data: Any,
    target_n: float,
    rng_seed: int = 0,
    *,
    omega_seed: int | None = None,
    budget: int = DEFAULT_BUDGET,
) -> UStatResult:
    """Horvitz-Thompson version: selected kernel values reweighted by 1/p, divided by C(n, s)."""
    stat = UStatistic(
        kernel,
        SamplingPlan.horvitz_thompson(target_n),
        seed=rng_seed,
        omega_seed=omega_seed,
        budget=budget,
    )
    return stat.evaluate(data)
