"""Generalized Hoeffding decomposition, projection variances and dominance diagnostics.

Exact mode works under a finite discrete distribution: every expectation is
a finite weighted sum over the support, so projections, their variances and
the covariance terms ``zeta^c`` are tabulated without quadrature error.
Continuous distributions go through :func:`estimate_zeta` (Monte Carlo).

Randomized kernels are integrated over omega by averaging ``omega_draws``
common draws; draw ``r`` uses the generator seeded by ``(omega_seed, r)``.
With one draw the kernel is effectively deterministic under that fixed omega.
"""

from __future__ import annotations

import itertools
import math
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any

import numpy as np

from .combinatorics import binom
from .errors import BudgetExceededError, DegenerateKernelError, InvalidOrderError
from .streams import tuple_rng
from .ustat import Kernel, eval_complete, fix_omega

DEFAULT_ORACLE_BUDGET = 10**6


@dataclass(frozen=True)
class DiscreteDistribution:
    """Finite distribution: ``support[i]`` has probability ``probabilities[i]``."""

    support: np.ndarray
    probabilities: np.ndarray

    def __post_init__(self) -> None:
        support = np.asarray(self.support, dtype=float)
        probs = np.asarray(self.probabilities, dtype=float)
        if len(support) != len(probs) or len(probs) == 0:
            raise ValueError("support and probabilities must be nonempty and the same length")
        if np.any(probs < 0) or abs(probs.sum() - 1.0) > 1e-12:
            raise ValueError("probabilities must be nonnegative and sum to 1")
        flat = support.reshape(len(support), -1)
        if len({tuple(row) for row in flat.tolist()}) != len(flat):
            raise ValueError("support entries must be distinct")
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "probabilities", probs)

    @classmethod
    def uniform(cls, support: Sequence[Any]) -> DiscreteDistribution:
        return cls(np.asarray(support, dtype=float), np.full(len(support), 1.0 / len(support)))

    def __len__(self) -> int:
        return len(self.probabilities)

    def sample(self, rng: np.random.Generator, shape: tuple[int, ...]) -> np.ndarray:
        idx = rng.choice(len(self), size=shape, p=self.probabilities)
        return self.support[idx]


def _kernel_draws(
    kernel: Kernel, batch: np.ndarray, omega_draws: int, omega_seed: int
) -> np.ndarray:
    """Kernel values of shape ``(N, R)``; column ``r`` evaluated under omega draw ``r``."""
    if not kernel.randomized:
        return kernel.evaluate_batch(batch)[:, None]
    out = np.empty((len(batch), omega_draws))
    for r in range(omega_draws):
        seq = np.random.SeedSequence([omega_seed, r])
        for i, pts in enumerate(batch):
            out[i, r] = kernel.func(pts, np.random.default_rng(seq))
    return out


def _product_weights(probs: np.ndarray, k: int) -> np.ndarray:
    w = np.ones(())
    for _ in range(k):
        w = np.multiply.outer(w, probs)
    return w


def psi(
    kernel: Kernel,
    dist: DiscreteDistribution,
    c: int,
    fixed: Sequence[Any] | np.ndarray,
    *,
    omega_draws: int = 1,
    omega_seed: int = 0,
    budget: int = DEFAULT_ORACLE_BUDGET,
) -> float:
    """E[h(fixed, D_[s-c]; omega)], uncentered, under the product measure of ``dist``."""
    s = kernel.order
    if not 1 <= c <= s:
        raise InvalidOrderError(f"need 1 <= c <= s, got c={c}, s={s}")
    fixed = np.asarray(fixed, dtype=float)
    if len(fixed) != c:
        raise ValueError(f"expected {c} fixed observations, got {len(fixed)}")
    m = len(dist)
    if m ** (s - c) > budget:
        raise BudgetExceededError(f"{m}^{s - c} support tuples exceeds budget {budget}")
    rest = np.array(list(itertools.product(range(m), repeat=s - c)), dtype=np.int64)
    rest = rest.reshape(len(rest), s - c)
    batch = np.concatenate(
        [np.broadcast_to(fixed, (len(rest),) + fixed.shape), dist.support[rest]], axis=1
    )
    weights = np.prod(dist.probabilities[rest], axis=1)
    values = _kernel_draws(kernel, batch, omega_draws, omega_seed).mean(axis=1)
    return math.fsum(weights * values)


@dataclass(frozen=True)
class HoeffdingTable:
    """Exact Hoeffding decomposition of a kernel under a discrete distribution.

    ``components[c-1]`` is ``h^(c)`` tabulated on ``support^c`` (an array with
    ``c`` axes of length ``|support|``); the top component is omega-averaged,
    while ``top_draws`` keeps it per omega draw. ``variances[c-1]`` is
    ``V^c`` and ``zetas[c-1]`` is ``zeta^c``.
    """

    order: int
    dist: DiscreteDistribution
    theta: float
    components: tuple[np.ndarray, ...]
    top_draws: np.ndarray
    variances: tuple[float, ...]
    zetas: tuple[float, ...]
    omega_draws: int = 1

    def component(self, c: int, support_idx: Sequence[int]) -> float:
        return float(self.components[c - 1][tuple(support_idx)])


def _embed(comp: np.ndarray, axes: Sequence[int], ndim: int) -> np.ndarray:
    """View ``comp`` (indexed by the sorted ``axes``) as an ``ndim``-array by broadcasting."""
    shape = [1] * ndim
    for a in axes:
        shape[a] = comp.shape[0]
    return comp.reshape(shape)


def _contract_last(arr: np.ndarray, probs: np.ndarray, k: int) -> np.ndarray:
    for _ in range(k):
        arr = arr @ probs
    return arr


def build_table(
    kernel: Kernel,
    dist: DiscreteDistribution,
    *,
    omega_draws: int = 1,
    omega_seed: int = 0,
    budget: int = DEFAULT_ORACLE_BUDGET,
) -> HoeffdingTable:
    """Tabulate every projection component, ``V^c`` and ``zeta^c`` exactly."""
    s, m = kernel.order, len(dist)
    if omega_draws < 1:
        raise ValueError("omega_draws must be >= 1")
    draws = omega_draws if kernel.randomized else 1
    if m**s * draws > budget:
        raise BudgetExceededError(f"{m}^{s} support tuples x {draws} draws exceeds budget {budget}")
    idx = np.array(list(itertools.product(range(m), repeat=s)), dtype=np.int64).reshape(-1, s)
    raw = _kernel_draws(kernel, dist.support[idx], draws, omega_seed)
    raw = raw.reshape((m,) * s + (draws,))
    hbar = raw.mean(axis=-1)
    probs = dist.probabilities
    theta = float(np.sum(_product_weights(probs, s) * hbar))

    components: list[np.ndarray] = []
    variances: list[float] = []
    zetas: list[float] = []
    for c in range(1, s + 1):
        psi_c = _contract_last(hbar, probs, s - c)
        lower = np.zeros((m,) * c)
        for j in range(1, c):
            for axes in itertools.combinations(range(c), j):
                lower = lower + _embed(components[j - 1], axes, c)
        weights = _product_weights(probs, c)
        comp = psi_c - theta - lower
        components.append(comp)
        if c < s:
            variances.append(float(np.sum(weights * comp**2)))
            zetas.append(float(np.sum(weights * psi_c**2) - theta**2))
    top_draws = raw - theta - (hbar - theta - components[-1])[..., None]
    weights = _product_weights(probs, s)[..., None]
    variances.append(float(np.sum(weights * top_draws**2) / draws))
    zetas.append(float(np.sum(weights * raw**2) / draws - theta**2))
    return HoeffdingTable(
        order=s,
        dist=dist,
        theta=theta,
        components=tuple(components),
        top_draws=top_draws,
        variances=tuple(variances),
        zetas=tuple(zetas),
        omega_draws=draws,
    )


def hoeffding_component(
    kernel: Kernel,
    dist: DiscreteDistribution,
    c: int,
    points: Sequence[Any] | np.ndarray,
    **kwargs: Any,
) -> float:
    """``h^(c)(points)`` for ``points`` drawn from the support of ``dist``."""
    points = np.asarray(points, dtype=float)
    if len(points) != c:
        raise ValueError(f"expected {c} points, got {len(points)}")
    lookup = dist.support.reshape(len(dist), -1)
    flat = points.reshape(c, -1)
    idx = []
    for row in flat:
        hit = np.flatnonzero(np.all(lookup == row, axis=1))
        if len(hit) == 0:
            raise ValueError(f"point {row} is not in the support")
        idx.append(int(hit[0]))
    return build_table(kernel, dist, **kwargs).component(c, idx)


def variance_decomposition(table: HoeffdingTable, n: int) -> float:
    """Var(U) for the complete statistic on ``n`` observations from the table's distribution."""
    s = table.order
    if n < s:
        raise InvalidOrderError(f"need n >= s, got n={n}, s={s}")
    terms = [binom(s, j) ** 2 / binom(n, j) * table.variances[j - 1] for j in range(1, s)]
    terms.append(table.variances[s - 1] / binom(n, s))
    return math.fsum(terms)


def reconstruct(table: HoeffdingTable, support_idx: Sequence[int], draw: int = 0) -> float:
    """theta + sum_j C(s, j) H^j evaluated on the dataset ``support[support_idx]``.

    The top-order term uses omega draw ``draw`` for every subsample, matching
    a kernel evaluated under that fixed omega.
    """
    s = table.order
    data = np.asarray(support_idx, dtype=np.int64)
    n = len(data)
    total = table.theta
    for j in range(1, s + 1):
        sub = np.array(list(itertools.combinations(range(n), j)), dtype=np.int64).reshape(-1, j)
        picked = data[sub]
        if j < s:
            vals = table.components[j - 1][tuple(picked.T)]
            total += binom(s, j) * math.fsum(vals) / len(sub)
        else:
            vals = table.top_draws[tuple(picked.T) + (draw,)]
            total += math.fsum(vals) / len(sub)
    return total


def exhaustive_variance(
    kernel: Kernel,
    dist: DiscreteDistribution,
    n: int,
    *,
    omega_seed: int = 0,
    budget: int = DEFAULT_ORACLE_BUDGET,
) -> tuple[float, float]:
    """Mean and variance of the complete U-statistic by enumerating all ``|support|^n`` datasets.

    Independent of the Hoeffding table: each dataset's statistic is computed
    by direct subset enumeration. A randomized kernel is evaluated under the
    fixed omega of draw 0.
    """
    m = len(dist)
    if m**n > budget:
        raise BudgetExceededError(f"{m}^{n} datasets exceeds budget {budget}")
    det = fix_omega(kernel, [omega_seed, 0])
    cache: dict[tuple[int, ...], float] = {}
    mean_terms: list[float] = []
    sq_terms: list[float] = []
    for seq in itertools.product(range(m), repeat=n):
        key = tuple(sorted(seq))
        if key not in cache:
            cache[key] = eval_complete(det, dist.support[list(key)]).value
        u = cache[key]
        w = float(np.prod(dist.probabilities[list(seq)]))
        mean_terms.append(w * u)
        sq_terms.append(w * u * u)
    mean = math.fsum(mean_terms)
    return mean, math.fsum(sq_terms) - mean * mean


def projection_inner_product(
    table: HoeffdingTable, c1: int, idx1: Sequence[int], c2: int, idx2: Sequence[int]
) -> float:
    """E[h^(c1)(D_idx1) h^(c2)(D_idx2)] over i.i.d. draws indexed by position.

    ``idx1`` and ``idx2`` are sorted position tuples of lengths ``c1`` and
    ``c2``; overlapping positions share the same observation. Top-order
    components are taken omega-averaged.
    """
    pool = sorted(set(idx1) | set(idx2))
    where = {p: i for i, p in enumerate(pool)}
    m = len(table.dist)
    probs = table.dist.probabilities
    a1 = [where[p] for p in idx1]
    a2 = [where[p] for p in idx2]
    terms = []
    for seq in itertools.product(range(m), repeat=len(pool)):
        w = float(np.prod(probs[list(seq)]))
        v1 = table.components[c1 - 1][tuple(seq[a] for a in a1)]
        v2 = table.components[c2 - 1][tuple(seq[a] for a in a2)]
        terms.append(w * v1 * v2)
    return math.fsum(terms)


@dataclass(frozen=True)
class ZetaEstimate:
    value: float
    se: float
    reps: int


Sampler = Callable[[np.random.Generator, tuple[int, ...]], np.ndarray]


def estimate_zeta(
    kernel: Kernel,
    sampler: Sampler,
    c: int,
    reps: int,
    rng_seed: int = 0,
    *,
    completions: int = 2,
    completion_sampler: Sampler | None = None,
    chunk: int = 8192,
    workers: int = 1,
) -> ZetaEstimate:
    """Monte Carlo estimate of zeta^c = Cov(h(D_c, D_{s-c}; w), h(D_c, D'_{s-c}; w')).

    Each of the ``reps`` groups draws a shared block of ``c`` observations
    and ``completions`` independent blocks of ``s - c`` (each with its own
    omega). zeta^c is the between-group variance component of this one-way
    layout, estimated without bias as ``(MSB - MSW) / J``. For ``c = s``
    there is nothing to complete, and the estimate is the kernel variance.
    ``sampler(rng, shape)`` returns observations with leading dimensions ``shape``.

    ``completion_sampler`` optionally draws the completion blocks instead.
    Any sampler that leaves ``E[h | shared block]`` unchanged is valid, for
    example one that replaces responses by their conditional means when the
    kernel is linear in the responses; it only shrinks the within-group noise.
    """
    s = kernel.order
    if not 1 <= c <= s:
        raise InvalidOrderError(f"need 1 <= c <= s, got c={c}, s={s}")
    if reps < 2:
        raise ValueError("estimate_zeta needs reps >= 2")
    complete_with = sampler if completion_sampler is None else completion_sampler
    J = 1 if c == s else int(completions)
    if J < 1 or (c < s and J < 2):
        raise ValueError("c < s needs completions >= 2")
    per_chunk = max(1, chunk // J)
    sizes = [min(per_chunk, reps - start) for start in range(0, reps, per_chunk)]

    def run(k: int) -> np.ndarray:
        b = sizes[k]
        rng = np.random.default_rng(np.random.SeedSequence([int(rng_seed), k]))
        shared = sampler(rng, (b, c))
        if c == s:
            batch = shared[:, None]
        else:
            rest = complete_with(rng, (b, J, s - c))
            shared = np.broadcast_to(shared[:, None], (b, J) + shared.shape[1:])
            batch = np.concatenate([shared, rest], axis=2)
        flat = batch.reshape((b * J,) + batch.shape[2:])
        if kernel.randomized:
            vals = np.array(
                [kernel.func(p, tuple_rng(rng_seed, (k, i))) for i, p in enumerate(flat)]
            )
        else:
            vals = kernel.evaluate_batch(flat)
        return vals.reshape(b, J)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, range(len(sizes))))
    else:
        parts = [run(k) for k in range(len(sizes))]
    vals = np.concatenate(parts)
    R = len(vals)
    group = vals.mean(axis=1)
    q = (group - group.mean()) ** 2 * (R / (R - 1))
    if J > 1:
        q = q - vals.var(axis=1, ddof=1) / J
    value = math.fsum(q) / R
    se = float(np.std(q, ddof=1) / math.sqrt(R))
    return ZetaEstimate(value, se, R)


def dominance_stat(n: int, s: int, zeta_s: float, zeta_1: float) -> float:
    """(s/n) * (zeta^s / (s * zeta^1) - 1); tends to 0 under Hajek dominance."""
    _check_nondegenerate(zeta_1)
    return (s / n) * (zeta_s / (s * zeta_1) - 1.0)


def sampling_stat(n: int, N: float, s: int, zeta_1: float) -> float:
    """n / (N * s * zeta^1); tends to 0 under asymptotically sufficient sampling."""
    _check_nondegenerate(zeta_1)
    return n / (N * s * zeta_1)


def hajek_ratio(n: int, s: int, var_u: float, zeta_1: float) -> float:
    """(n / s^2) * Var(U) / zeta^1; tends to 1 when the Hajek projection dominates."""
    _check_nondegenerate(zeta_1)
    return (n / s**2) * var_u / zeta_1


def _check_nondegenerate(zeta_1: float) -> None:
    if not zeta_1 > 0:
        raise DegenerateKernelError(
            f"zeta^1 = {zeta_1} is not positive; the Hajek projection is degenerate"
        )


@dataclass(frozen=True)
class DominanceDiagnostic:
    n: int
    s: int
    zeta1: float
    zetaS: float
    dominance_stat: float
    sampling_stat: float | None = None
    hajek_ratio: float | None = None

    @classmethod
    def compute(
        cls,
        n: int,
        s: int,
        zeta1: float,
        zetaS: float,
        *,
        N: float | None = None,
        var_u: float | None = None,
    ) -> DominanceDiagnostic:
        return cls(
            n=n,
            s=s,
            zeta1=zeta1,
            zetaS=zetaS,
            dominance_stat=dominance_stat(n, s, zetaS, zeta1),
            sampling_stat=None if N is None else sampling_stat(n, N, s, zeta1),
            hajek_ratio=None if var_u is None else hajek_ratio(n, s, var_u, zeta1),
        )
