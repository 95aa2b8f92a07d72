"""Oracle suites behind ``jackustat verify``.

Each check compares a fast or closed-form computation with an independent
exhaustive one and reports both numbers.
"""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import combinatorics as cb
from .hoeffding import DiscreteDistribution, build_table, exhaustive_variance, reconstruct, variance_decomposition
from .jackknife import EstimatorFn, jk_variance, jkd_variance
from .tdnn import (
    RegressionDataset,
    TdnnConfig,
    dnn_estimate,
    dnn_kernel,
    dnn_weights,
    studentized_ci,
    tdnn_jackknife,
)
from .ustat import eval_complete, fix_omega, mean_kernel, product_kernel, sign_flip_kernel, variance_kernel


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    measured: object
    expected: object

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name}: measured={self.measured} expected={self.expected}"


def _close(name: str, measured: float, expected: float, tol: float) -> Check:
    return Check(name, abs(measured - expected) <= tol, measured, expected)


def combinatorics_suite() -> list[Check]:
    out = []
    pascal_ok = all(
        cb.binom(n, k) == cb.binom(n - 1, k - 1) + cb.binom(n - 1, k)
        for n in range(1, 40)
        for k in range(1, n)
    )
    out.append(Check("binom satisfies Pascal's rule for n < 40", pascal_ok, pascal_ok, True))
    vdm = all(cb.chu_vandermonde_check(m, n, r) for m in range(8) for n in range(8) for r in range(m + n + 1))
    out.append(Check("Chu-Vandermonde identity for m, n < 8", vdm, vdm, True))
    listed = list(cb.subsets(9, 4))
    unranked = [cb.unrank_subset(9, 4, r) for r in range(len(listed))]
    out.append(Check("unrank_subset inverts lexicographic enumeration (9, 4)", unranked == listed, len(listed), 126))

    ss = cb.kernel_product_probability(2, 1, "shared-shared")
    sn = cb.kernel_product_probability(2, 1, "shared-new")
    nn = cb.kernel_product_probability(2, 1, "new-new")
    out.append(Check("shared-shared at (s, c) = (2, 1)", ss == Fraction(1, 3), ss, Fraction(1, 3)))
    out.append(Check("shared-new at (s, c) = (2, 1)", sn == Fraction(1, 6), sn, Fraction(1, 6)))
    out.append(Check("new-new at (s, c) = (2, 1)", nn == Fraction(1, 3), nn, Fraction(1, 3)))
    alt = cb.kernel_product_closed_form(2, 1, "new-new", top_offset=1)
    out.append(Check("offset-1 new-new form differs from the oracle at (2, 1)", alt != nn, alt, f"!= {nn}"))

    bad = []
    for s in range(1, cb.MAX_ORDERING_POINTS + 1):
        for c in range(1, s + 1):
            if 2 * s - c > cb.MAX_ORDERING_POINTS:
                continue
            variants = [cb.Variant.SHARED_SHARED] + ([cb.Variant.SHARED_NEW, cb.Variant.NEW_NEW] if c < s else [])
            for v in variants:
                if cb.kernel_product_probability(s, c, v) != cb.kernel_product_closed_form(s, c, v):
                    bad.append((s, c, v.value))
            if cb.kernel_product_total(s, c) != 1:
                bad.append((s, c, "total"))
    out.append(Check("ordering oracle equals closed forms for 2s - c <= 12", not bad, bad or "all equal", "all equal"))
    kappa = [cb.nearest_probability(s) for s in range(1, 7)]
    out.append(Check("E[kappa] = 1/s for s <= 6", kappa == [Fraction(1, s) for s in range(1, 7)], kappa[-1], Fraction(1, 6)))
    return out


def hoeffding_suite() -> list[Check]:
    out = []
    dist = DiscreteDistribution(np.array([-1.0, 0.5, 2.0]), np.array([0.3, 0.5, 0.2]))
    kernels = [mean_kernel(), variance_kernel(2), product_kernel(3), fix_omega(sign_flip_kernel(2), [0, 0])]
    for kernel in kernels:
        table = build_table(kernel, dist)
        for n in (kernel.order, 5):
            mean, var = exhaustive_variance(kernel, dist, n)
            out.append(_close(f"{kernel.name}: variance decomposition vs exhaustive, n={n}",
                              variance_decomposition(table, n), var, 1e-10))
            out.append(_close(f"{kernel.name}: E[U] vs theta, n={n}", mean, table.theta, 1e-10))
        data = [0, 2, 1, 1, 2]
        direct = eval_complete(kernel, dist.support[data]).value
        out.append(_close(f"{kernel.name}: reconstruction on a 5-point dataset", reconstruct(table, data), direct, 1e-10))
    return out


def jackknife_suite() -> list[Check]:
    out = []
    rng = np.random.default_rng(7)
    mean = EstimatorFn.of(np.mean)
    worst = 0.0
    for _ in range(25):
        y = rng.normal(size=int(rng.integers(2, 40)))
        jk = jk_variance(mean, y).variance
        worst = max(worst, abs(jk - np.var(y, ddof=1) / len(y)))
    out.append(_close("delete-1 jackknife of the mean equals S^2/n", worst, 0.0, 1e-12))
    y = rng.normal(size=12)
    jkd = jkd_variance(mean, y, 3).variance
    out.append(_close("delete-3 jackknife of the mean equals S^2/n", jkd, float(np.var(y, ddof=1) / 12), 1e-12))
    d1 = jkd_variance(mean, y, 1).variance
    out.append(Check("delete-d with d = 1 is the delete-1 jackknife", d1 == jk_variance(mean, y).variance, d1, "identical"))
    return out


def tdnn_suite() -> list[Check]:
    out = []
    exact = all(
        abs(w - Fraction(math.comb(n - i, s - 1), math.comb(n, s))) <= 1e-12
        for n in range(1, 40)
        for s in range(1, n + 1)
        for i, w in enumerate(dnn_weights(n, s), start=1)
    )
    out.append(Check("DNN weights match C(n-i, s-1)/C(n, s) for n < 40", exact, exact, True))
    toy = RegressionDataset([1.0, 2.0, 3.0], [10.0, 20.0, 30.0])
    out.append(_close("DNN toy example n=3, s=2, x=0", dnn_estimate([0.0], toy, 2), 40 / 3, 1e-12))
    rng = np.random.default_rng(11)
    worst = 0.0
    for k in (1, 2):
        for n in range(2, 9):
            data = RegressionDataset(rng.random((n, k)), rng.normal(size=n))
            x = rng.random(k)
            for s in range(1, min(n, 4) + 1):
                worst = max(worst, abs(dnn_estimate(x, data, s) - eval_complete(dnn_kernel(x, s), data.stacked()).value))
    out.append(_close("DNN closed form vs subset enumeration", worst, 0.0, 1e-12))
    data = RegressionDataset(rng.random(8), rng.normal(size=8))
    cfg = TdnnConfig(2, 3, [0.4])
    fast = tdnn_jackknife([0.4], data, cfg, 1).variance
    naive = tdnn_jackknife([0.4], data, cfg, 1, naive=True).variance
    out.append(_close("TDNN jackknife incremental vs full re-sort", fast, naive, 1e-12))
    ci = studentized_ci(0.0, 1.0, 0.95)
    out.append(_close("95% normal quantile", ci.ci_hi, 1.959963984540054, 1e-8))
    return out


SUITES: dict[str, Callable[[], list[Check]]] = {
    "combinatorics": combinatorics_suite,
    "hoeffding": hoeffding_suite,
    "jackknife": jackknife_suite,
    "tdnn": tdnn_suite,
}


def run_suite(name: str) -> list[Check]:
    if name == "all":
        return [c for suite in SUITES.values() for c in suite()]
    return SUITES[name]()
