"""Data-generating processes, Monte Carlo truth, and the headline experiments.

Every replicate draws from its own substream, a pure function of
``(master seed, experiment tag, n, replicate)``, so results do not depend on
how many worker threads run the replicates or in what order they finish.
"""

from __future__ import annotations

import csv
import math
from collections.abc import Callable, Mapping, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from typing import Any, TypeVar

import numpy as np

from .errors import ConfigError
from .hoeffding import DominanceDiagnostic, estimate_zeta
from .jackknife import EXACT, SUBSAMPLED, deletion_sets, jkd_from_values, jkd_variance
from .streams import replicate_seed, tag
from .tdnn import RegressionDataset, TdnnConfig, studentized_ci, tdnn_estimate, tdnn_jackknife, tdnn_kernel
from .ustat import Kernel, SamplingPlan, UStatistic, mean_kernel, variance_kernel

CSV_HEADER = ("experiment", "n", "s1", "s2", "d", "method", "metric", "value", "mc_se", "seed")
DESIGNS = ("uniform", "cosine")
MEANS = ("linear", "sine-product", "gaussian-bump")
NOISES = ("homoskedastic", "heteroskedastic")
ESTIMATORS = ("tdnn", "mean", "ustat-variance")
PLANS = ("complete", "bernoulli", "ht", "both")
EXPERIMENTS = ("ratio", "coverage", "dominance")
BUMP_WIDTH = 0.15

T = TypeVar("T")


@dataclass(frozen=True)
class DgpConfig:
    """``Y = mu(X) + sigma(X) * eps`` with ``X`` on ``[0, 1]^k`` and standard normal ``eps``.

    ``cosine`` uses the product density ``1 + cos(2 pi u) / 2`` per coordinate.
    Heteroskedastic noise is ``0.5 + 0.25 * mean(x)``; homoskedastic noise is
    the constant ``sigma``. ``coef`` is the slope of the linear mean.
    """

    k: int = 1
    design: str = "uniform"
    mu: str = "sine-product"
    noise: str = "heteroskedastic"
    sigma: float = 1.0
    coef: float = 1.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ConfigError(f"dgp.k must be >= 1, got {self.k}")
        for name, value, allowed in (
            ("design", self.design, DESIGNS),
            ("mu", self.mu, MEANS),
            ("noise", self.noise, NOISES),
        ):
            if value not in allowed:
                raise ConfigError(f"dgp.{name} must be one of {allowed}, got {value!r}")
        if self.sigma < 0:
            raise ConfigError(f"dgp.sigma must be >= 0, got {self.sigma}")

    def mean_function(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if self.mu == "linear":
            return self.coef * X.sum(axis=-1)
        if self.mu == "sine-product":
            return np.prod(np.sin(2 * np.pi * X) * (1 + X), axis=-1)
        return np.exp(-np.sum((X - 0.5) ** 2, axis=-1) / (2 * BUMP_WIDTH**2))

    def noise_scale(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if self.noise == "homoskedastic":
            return np.full(X.shape[:-1], float(self.sigma))
        return 0.5 + 0.25 * X.mean(axis=-1)

    def _design_draw(self, rng: np.random.Generator, count: int) -> np.ndarray:
        if self.design == "uniform":
            return rng.random(count)
        out = np.empty(count)
        filled = 0
        while filled < count:
            m = 2 * (count - filled) + 8
            u = rng.random(m)
            keep = u[rng.random(m) * 1.5 < 1 + 0.5 * np.cos(2 * np.pi * u)][: count - filled]
            out[filled : filled + len(keep)] = keep
            filled += len(keep)
        return out

    def draw(self, rng: np.random.Generator, shape: tuple[int, ...], noise: bool = True) -> np.ndarray:
        """Observations ``(x, y)`` stacked along a trailing axis of length ``k + 1``.

        With ``noise=False`` the response is ``mu(x)`` itself.
        """
        count = int(np.prod(shape)) if shape else 1
        X = self._design_draw(rng, count * self.k).reshape(count, self.k)
        Y = self.mean_function(X)
        if noise:
            Y = Y + self.noise_scale(X) * rng.standard_normal(count)
        return np.column_stack([X, Y]).reshape(tuple(shape) + (self.k + 1,))


def dgp_sample(cfg: DgpConfig, n: int, rng_seed: int | np.random.SeedSequence | None = None) -> RegressionDataset:
    """``n`` i.i.d. draws; identical for identical seeds (``cfg.seed`` when omitted)."""
    if n < 1:
        raise ConfigError(f"need n >= 1, got {n}")
    rng = np.random.default_rng(cfg.seed if rng_seed is None else rng_seed)
    return RegressionDataset.from_stacked(cfg.draw(rng, (n,)))


def _design_density(cfg: DgpConfig, u: np.ndarray) -> np.ndarray:
    if cfg.design == "uniform":
        return np.ones_like(u)
    return 1 + 0.5 * np.cos(2 * np.pi * u)


def dgp_mean(cfg: DgpConfig, grid: int = 200_000) -> float:
    """E[mu(X)], from one-dimensional midpoint quadrature (every mean is a sum or product over coordinates)."""
    u = (np.arange(grid) + 0.5) / grid
    dens = _design_density(cfg, u)
    if cfg.mu == "linear":
        return cfg.coef * cfg.k * float(np.mean(u * dens))
    if cfg.mu == "sine-product":
        return float(np.mean(np.sin(2 * np.pi * u) * (1 + u) * dens)) ** cfg.k
    return float(np.mean(np.exp(-((u - 0.5) ** 2) / (2 * BUMP_WIDTH**2)) * dens)) ** cfg.k


@dataclass(frozen=True)
class ExperimentConfig:
    """Grid, estimator and Monte Carlo settings shared by the experiments.

    ``gamma`` sets the kernel order ``s2 = ceil(n^gamma)`` (the U-statistic
    order for ``ustat-variance``) and ``s1 = ceil(rho * s2)``. Incomplete
    plans select ``N = ceil(n^sampling_exponent)`` subsamples in expectation.
    """

    experiments: tuple[str, ...] = ("ratio",)
    estimator: str = "tdnn"
    n_grid: tuple[int, ...] = (100, 250, 500)
    gamma: float = 0.6
    rho: float = 0.5
    d_values: tuple[int, ...] = (1, 2)
    reps: int = 400
    truth_reps: int | None = None
    x: tuple[float, ...] = (0.5,)
    level: float = 0.95
    plan: str = "complete"
    sampling_exponent: float = 1.2
    deletion: str = "fixed"
    jackknife_mode: str = EXACT
    jackknife_B: int | None = None
    zeta_reps: int = 200_000
    zeta_completions: int = 4
    grid_zeta_reps: int = 4_000_000
    s2_grid: tuple[int, ...] = (4, 8, 16)
    seed: int = 0
    dgp: DgpConfig = field(default_factory=DgpConfig)

    def __post_init__(self) -> None:
        for name in ("experiments", "n_grid", "d_values", "x", "s2_grid"):
            value = getattr(self, name)
            if isinstance(value, (str, bytes)) or not isinstance(value, Sequence):
                raise ConfigError(f"{name} must be a list, got {value!r}")
            object.__setattr__(self, name, tuple(value))
        if isinstance(self.dgp, Mapping):
            object.__setattr__(self, "dgp", _build(DgpConfig, self.dgp, "dgp"))
        for e in self.experiments:
            if e not in EXPERIMENTS:
                raise ConfigError(f"unknown experiment {e!r}; choose from {EXPERIMENTS}")
        if self.estimator not in ESTIMATORS:
            raise ConfigError(f"estimator must be one of {ESTIMATORS}, got {self.estimator!r}")
        if self.plan not in PLANS:
            raise ConfigError(f"plan must be one of {PLANS}, got {self.plan!r}")
        if self.jackknife_mode not in (EXACT, SUBSAMPLED):
            raise ConfigError(f"jackknife_mode must be {EXACT!r} or {SUBSAMPLED!r}")
        if self.deletion not in ("fixed", "recompute"):
            raise ConfigError(f"deletion must be 'fixed' or 'recompute', got {self.deletion!r}")
        if not 0 < self.rho < 1:
            raise ConfigError(f"rho must lie in (0, 1), got {self.rho}")
        if not 0 < self.level < 1:
            raise ConfigError(f"level must lie in (0, 1), got {self.level}")
        if len(self.x) != self.dgp.k:
            raise ConfigError(f"query point x has {len(self.x)} coordinates, dgp.k = {self.dgp.k}")
        if self.reps < 0 or (self.truth_reps is not None and self.truth_reps < 2):
            raise ConfigError("reps must be >= 0 and truth_reps >= 2")
        if any(d < 1 for d in self.d_values):
            raise ConfigError("every d must be >= 1")
        for n in self.n_grid:
            s1, s2 = self.orders(n)
            if s2 >= n:
                raise ConfigError(f"s2(n) = {s2} must be < n = {n}")
            if self.estimator == "tdnn" and s1 >= s2:
                raise ConfigError(f"s1 = {s1} must be < s2 = {s2} at n = {n}")
            if n - max(self.d_values) < s2:
                raise ConfigError(f"n - d must be >= s2 at n = {n}")

    @property
    def truth_count(self) -> int:
        return 4 * self.reps if self.truth_reps is None else self.truth_reps

    def orders(self, n: int) -> tuple[int | None, int]:
        if self.estimator == "mean":
            return None, 1
        s2 = math.ceil(n**self.gamma - 1e-9)
        if self.estimator == "ustat-variance":
            return None, max(s2, 2)
        return max(1, math.ceil(self.rho * s2 - 1e-9)), s2

    def target_count(self, n: int) -> int:
        return math.ceil(n**self.sampling_exponent - 1e-9)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, raw: Mapping[str, Any]) -> ExperimentConfig:
        return _build(cls, raw, "config")


def _build(cls: type[T], raw: Any, where: str) -> T:
    if not isinstance(raw, Mapping):
        raise ConfigError(f"{where}: expected an object, got {type(raw).__name__}")
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(raw) - known)
    if unknown:
        raise ConfigError(f"{where}: unknown field(s) {', '.join(unknown)}")
    try:
        return cls(**raw)
    except ConfigError as exc:
        raise ConfigError(f"{where}: {exc}") from None
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from None


# -- parallel helpers ---------------------------------------------------------


def parallel_map(fn: Callable[[Any], T], items: Sequence[Any], threads: int = 1) -> list[T]:
    """Ordered map; the result never depends on ``threads``."""
    if threads > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


def _seed_int(seq: np.random.SeedSequence) -> int:
    return int(seq.generate_state(1, np.uint64)[0])


# -- truth and summaries ------------------------------------------------------


@dataclass(frozen=True)
class Estimate:
    value: float
    se: float
    reps: int


def variance_with_se(values: Sequence[float] | np.ndarray) -> Estimate:
    """Sample variance with its delete-1 jackknife standard error."""
    v = np.asarray(values, dtype=float)
    M = len(v)
    if M < 2:
        raise ConfigError("a variance needs at least 2 replicates")
    dev2 = (v - v.mean()) ** 2
    ss = math.fsum(dev2)
    var = ss / (M - 1)
    if M < 3:
        return Estimate(var, math.sqrt(2.0 / (M - 1)) * var, M)
    loo = (ss - dev2 * M / (M - 1)) / (M - 2)
    se = math.sqrt((M - 1) / M * math.fsum((loo - loo.mean()) ** 2))
    return Estimate(var, se, M)


def quantile_with_se(values: Sequence[float] | np.ndarray, p: float) -> Estimate:
    """Empirical quantile with an order-statistic standard error.

    The error is half the width of the distribution-free 95% interval
    between order statistics, divided by 1.96.
    """
    v = np.sort(np.asarray(values, dtype=float))
    M = len(v)
    q = float(np.quantile(v, p))
    spread = 1.96 * math.sqrt(M * p * (1 - p))
    lo = max(0, math.floor(M * p - spread) - 1)
    hi = min(M - 1, math.ceil(M * p + spread) - 1)
    return Estimate(q, float(v[hi] - v[lo]) / (2 * 1.96), M)


def mean_with_se(values: Sequence[float] | np.ndarray) -> Estimate:
    v = np.asarray(values, dtype=float)
    se = float(np.std(v, ddof=1) / math.sqrt(len(v))) if len(v) > 1 else math.nan
    return Estimate(math.fsum(v) / len(v), se, len(v))


def mc_truth_variance(
    estimator: Callable[[RegressionDataset, int], float],
    dgp: DgpConfig,
    n: int,
    M: int,
    seed: int,
    *,
    threads: int = 1,
    stream: str = "truth",
) -> Estimate:
    """Variance of ``estimator`` across ``M`` independent datasets of size ``n``.

    ``estimator(data, design_seed)`` receives a per-replicate integer seed for
    any internal randomness (subsample selection, omega).
    """
    if M < 2:
        raise ConfigError(f"mc_truth_variance needs M >= 2, got {M}")

    def one(r: int) -> float:
        data = dgp_sample(dgp, n, replicate_seed(seed, tag(stream), n, r))
        return float(estimator(data, _seed_int(replicate_seed(seed, tag(stream), n, r, 1))))

    return variance_with_se(parallel_map(one, range(M), threads))


# -- estimator families -------------------------------------------------------


def _mean_deleted(y: np.ndarray, sets: np.ndarray) -> np.ndarray:
    return (math.fsum(y) - y[sets].sum(axis=1)) / (len(y) - sets.shape[1])


class _Family:
    """Estimators under study at one ``n``: point values and jackknife variances."""

    def __init__(self, cfg: ExperimentConfig, n: int):
        self.cfg = cfg
        self.n = n
        self.s1, self.s2 = cfg.orders(n)
        self.x = np.asarray(cfg.x, dtype=float)
        if cfg.estimator == "tdnn":
            self.tdnn = TdnnConfig(self.s1, self.s2, self.x)
            self.methods = ["tdnn"]
        elif cfg.estimator == "mean":
            self.methods = ["mean"]
        else:
            self.kernel = variance_kernel(self.s2)
            plans = ["bernoulli", "ht"] if cfg.plan == "both" else [cfg.plan]
            self.methods = [f"ustat-{p}" for p in plans]

    def _ustat(self, method: str, design_seed: int) -> UStatistic:
        mode = method.removeprefix("ustat-")
        if mode == "complete":
            plan = SamplingPlan.complete()
        elif mode == "bernoulli":
            plan = SamplingPlan.bernoulli(self.cfg.target_count(self.n))
        else:
            plan = SamplingPlan.horvitz_thompson(self.cfg.target_count(self.n))
        return UStatistic(
            self.kernel,
            plan,
            seed=design_seed,
            deletion=self.cfg.deletion,
            max_deleted=max(self.cfg.d_values),
        )

    def values(self, data: RegressionDataset, design_seed: int) -> dict[str, float]:
        out = {}
        for method in self.methods:
            if method == "tdnn":
                out[method] = tdnn_estimate(self.x, data, self.tdnn)
            elif method == "mean":
                out[method] = math.fsum(data.Y) / len(data)
            else:
                out[method] = self._ustat(method, design_seed)(data.Y)
        return out

    def jackknife(self, data: RegressionDataset, design_seed: int, d: int) -> dict[str, tuple[float, float]]:
        """``method -> (estimate, delete-d variance)``."""
        cfg = self.cfg
        out = {}
        jk_seed = design_seed ^ d
        for method in self.methods:
            if method == "tdnn":
                rep = tdnn_jackknife(
                    self.x, data, self.tdnn, d, cfg.jackknife_mode, B=cfg.jackknife_B, seed=jk_seed
                )
                out[method] = (rep.estimate, rep.variance)
            elif method == "mean":
                sets = deletion_sets(self.n, d, cfg.jackknife_mode, B=cfg.jackknife_B, seed=jk_seed)
                est = math.fsum(data.Y) / len(data)
                out[method] = (est, jkd_from_values(est, _mean_deleted(data.Y, sets), self.n, d))
            else:
                stat = self._ustat(method, design_seed)
                rep = jkd_variance(
                    stat.estimator(), data.Y, d, cfg.jackknife_mode, B=cfg.jackknife_B, seed=jk_seed
                )
                out[method] = (rep.estimate, rep.variance)
        return out

    def kernel_for_zeta(self) -> Kernel:
        if self.cfg.estimator == "tdnn":
            return tdnn_kernel(self.x, self.s1, self.s2)
        if self.cfg.estimator == "mean":
            return _response_kernel(mean_kernel())
        return _response_kernel(self.kernel)


def _response_kernel(kernel: Kernel) -> Kernel:
    """Apply a scalar kernel to the response column of ``(x, y)`` observations."""
    return Kernel(kernel.order, lambda b: kernel.func(b[..., -1]), vectorized=True, name=kernel.name)


# -- experiments --------------------------------------------------------------

Row = tuple


def _row(cfg: ExperimentConfig, experiment: str, n: int, fam: _Family | None, d: int | None,
         method: str, metric: str, est: Any, se: float | None = None) -> Row:
    if hasattr(est, "se"):
        value, se = est.value, est.se
    else:
        value = est
    s1 = fam.s1 if fam else None
    s2 = fam.s2 if fam else None
    return (experiment, n, s1, s2, d, method, metric, float(value), se, cfg.seed)


def _jk_label(method: str, d: int) -> list[str]:
    return [f"{method}-JK", f"{method}-JKD"] if d == 1 else [f"{method}-JKD"]


def ratio_experiment(cfg: ExperimentConfig, *, threads: int = 1) -> list[Row]:
    """Jackknife variance over Monte Carlo truth variance, summarized per ``(n, method, d)``."""
    if cfg.reps < 1:
        raise ConfigError("ratio experiment needs reps >= 1")
    rows: list[Row] = []
    for n in cfg.n_grid:
        fam = _Family(cfg, n)

        def truth_one(r: int, fam: _Family = fam, n: int = n) -> dict[str, float]:
            data = dgp_sample(cfg.dgp, n, replicate_seed(cfg.seed, tag("truth"), n, r))
            return fam.values(data, _seed_int(replicate_seed(cfg.seed, tag("truth"), n, r, 1)))

        truth_vals = parallel_map(truth_one, range(cfg.truth_count), threads)
        truth = {m: variance_with_se([t[m] for t in truth_vals]) for m in fam.methods}

        def rep_one(r: int, fam: _Family = fam, n: int = n) -> dict[int, dict[str, tuple[float, float]]]:
            data = dgp_sample(cfg.dgp, n, replicate_seed(cfg.seed, tag("ratio"), n, r))
            dseed = _seed_int(replicate_seed(cfg.seed, tag("ratio"), n, r, 1))
            return {d: fam.jackknife(data, dseed, d) for d in cfg.d_values}

        reps = parallel_map(rep_one, range(cfg.reps), threads)
        for method in fam.methods:
            rows.append(_row(cfg, "ratio", n, fam, None, method, "sigma2_mc", truth[method]))
            for d in cfg.d_values:
                jk = np.array([rep[d][method][1] for rep in reps])
                ratios = jk / truth[method].value
                for label in _jk_label(method, d):
                    rows.append(_row(cfg, "ratio", n, fam, d, label, "jk_variance_mean", mean_with_se(jk)))
                    rows.append(_row(cfg, "ratio", n, fam, d, label, "ratio_median", quantile_with_se(ratios, 0.5)))
                    rows.append(_row(cfg, "ratio", n, fam, d, label, "ratio_q25", quantile_with_se(ratios, 0.25)))
                    rows.append(_row(cfg, "ratio", n, fam, d, label, "ratio_q75", quantile_with_se(ratios, 0.75)))
                    rows.append(_row(cfg, "ratio", n, fam, d, label, "ratio_mean", mean_with_se(ratios)))
    return rows


def coverage_experiment(cfg: ExperimentConfig, *, threads: int = 1) -> list[Row]:
    """Empirical coverage of studentized jackknife intervals for the known target."""
    if cfg.reps < 1:
        raise ConfigError("coverage experiment needs reps >= 1 (M = 0 gives an empty table)")
    if cfg.estimator == "tdnn":
        target = float(cfg.dgp.mean_function(np.asarray(cfg.x)[None])[0])
    elif cfg.estimator == "mean":
        target = dgp_mean(cfg.dgp)
    else:
        raise ConfigError("coverage needs a known target: use estimator 'tdnn' or 'mean'")
    rows: list[Row] = []
    for n in cfg.n_grid:
        fam = _Family(cfg, n)

        def rep_one(r: int, fam: _Family = fam, n: int = n) -> dict[int, dict[str, tuple[float, float]]]:
            data = dgp_sample(cfg.dgp, n, replicate_seed(cfg.seed, tag("coverage"), n, r))
            return {d: fam.jackknife(data, 0, d) for d in cfg.d_values}

        reps = parallel_map(rep_one, range(cfg.reps), threads)
        for method in fam.methods:
            for d in cfg.d_values:
                cis = [studentized_ci(*rep[d][method], cfg.level) for rep in reps]
                hits = np.array([ci.covers(target) for ci in cis], dtype=float)
                p = float(hits.mean())
                half = np.array([(ci.ci_hi - ci.ci_lo) / 2 for ci in cis])
                for label in _jk_label(method, d):
                    rows.append(_row(cfg, "coverage", n, fam, d, label, "coverage",
                                     p, math.sqrt(p * (1 - p) / len(hits))))
                    rows.append(_row(cfg, "coverage", n, fam, d, label, "ci_halfwidth_mean", mean_with_se(half)))
    return rows


def _zeta_pair(cfg: ExperimentConfig, fam: _Family, n: int, threads: int):
    kernel = fam.kernel_for_zeta()
    seed1 = _seed_int(replicate_seed(cfg.seed, tag("zeta1"), n, fam.s2))
    seed_s = _seed_int(replicate_seed(cfg.seed, tag("zetaS"), n, fam.s2))
    z1 = _zeta1(cfg, kernel, cfg.zeta_reps, seed1, threads)
    if kernel.order == 1:
        return z1, z1
    zs = estimate_zeta(kernel, cfg.dgp.draw, kernel.order, cfg.zeta_reps, seed_s, workers=threads)
    return z1, zs


def _zeta1(cfg: ExperimentConfig, kernel: Kernel, reps: int, seed: int, threads: int):
    if kernel.order == 1:
        return estimate_zeta(kernel, cfg.dgp.draw, 1, reps, seed, workers=threads)
    # TDNN is linear in the responses and the noise is conditionally mean zero,
    # so completions may carry mu(x) instead of y without changing E[h | shared].
    noise_free = None
    if cfg.estimator == "tdnn":
        def noise_free(rng: np.random.Generator, shape: tuple[int, ...]) -> np.ndarray:
            return cfg.dgp.draw(rng, shape, noise=False)
    return estimate_zeta(
        kernel,
        cfg.dgp.draw,
        1,
        reps,
        seed,
        completions=cfg.zeta_completions,
        completion_sampler=noise_free,
        workers=threads,
    )


def dominance_experiment(cfg: ExperimentConfig, *, threads: int = 1) -> list[Row]:
    """Monte Carlo zeta^1, zeta^s and the dominance statistic along the grid.

    Also tabulates ``s2 * zeta^1`` across ``s2_grid`` at the largest ``n``.
    Errors for the derived statistics come from the delta method.
    """
    rows: list[Row] = []
    for n in cfg.n_grid:
        fam = _Family(cfg, n)
        s = fam.s2
        z1, zs = _zeta_pair(cfg, fam, n, threads)
        diag = DominanceDiagnostic.compute(n, s, z1.value, zs.value)
        rel = math.hypot(z1.se / z1.value, zs.se / zs.value)
        method = fam.methods[0] if cfg.estimator != "ustat-variance" else "ustat"
        rows.append(_row(cfg, "dominance", n, fam, None, method, "zeta1", z1))
        rows.append(_row(cfg, "dominance", n, fam, None, method, "zetaS", zs))
        rows.append(_row(cfg, "dominance", n, fam, None, method, "dominance_stat",
                         diag.dominance_stat, (zs.value / (n * z1.value)) * rel))
        rows.append(_row(cfg, "dominance", n, fam, None, method, "s2_zeta1", s * z1.value, s * z1.se))
    if cfg.estimator == "tdnn":
        n = max(cfg.n_grid)
        for s2 in cfg.s2_grid:
            s1 = max(1, math.ceil(cfg.rho * s2 - 1e-9))
            kernel = tdnn_kernel(cfg.x, s1, s2)
            seed1 = _seed_int(replicate_seed(cfg.seed, tag("zeta-grid"), n, s2))
            z1 = _zeta1(cfg, kernel, cfg.grid_zeta_reps, seed1, threads)
            rows.append(("dominance", n, s1, s2, None, "tdnn-grid", "s2_zeta1",
                         s2 * z1.value, s2 * z1.se, cfg.seed))
    return rows


RUNNERS = {
    "ratio": ratio_experiment,
    "coverage": coverage_experiment,
    "dominance": dominance_experiment,
}


def _fmt(v: Any) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def write_csv(rows: Sequence[Row], path: Any) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
