"""Acceptance criteria, one test each.

Each check returns ``(passed, detail)``; the test records a PASS/FAIL line,
prints it and asserts. ``python3 tests/test_acceptance.py`` prints the lines
without pytest.
"""

from __future__ import annotations

import json
import math
import subprocess
import sys
import tempfile
import time
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from jackustat import combinatorics as cb  # noqa: E402
from jackustat.hoeffding import (  # noqa: E402
    DiscreteDistribution,
    build_table,
    exhaustive_variance,
    reconstruct,
    variance_decomposition,
)
from jackustat.jackknife import EstimatorFn, jk_variance  # noqa: E402
from jackustat.simulation import (  # noqa: E402
    DgpConfig,
    ExperimentConfig,
    coverage_experiment,
    dominance_experiment,
    ratio_experiment,
)
from jackustat.tdnn import RegressionDataset, dnn_estimate, dnn_kernel  # noqa: E402
from jackustat.ustat import (  # noqa: E402
    eval_complete,
    fix_omega,
    mean_kernel,
    product_kernel,
    sign_flip_kernel,
    variance_kernel,
)

from oracles import tdnn_zeta1_quadrature  # noqa: E402

ROOT = Path(__file__).resolve().parents[1]
CONFIGS = ROOT / "configs"


def _config(name: str, **overrides) -> ExperimentConfig:
    raw = json.loads((CONFIGS / name).read_text())
    raw.update(overrides)
    return ExperimentConfig.from_dict(raw)


def _lookup(rows, **match):
    names = ("experiment", "n", "s1", "s2", "d", "method", "metric", "value", "mc_se", "seed")
    found = [r for r in rows if all(r[names.index(k)] == v for k, v in match.items())]
    assert len(found) == 1, (match, found)
    return found[0][7], found[0][8]


def criterion_1():
    t0 = time.perf_counter()
    dists = [
        DiscreteDistribution(np.array([0.0, 1.0]), np.array([0.3, 0.7])),
        DiscreteDistribution(np.array([-1.0, 2.0]), np.array([0.5, 0.5])),
        DiscreteDistribution(np.array([-1.0, 0.5, 2.0]), np.array([0.3, 0.5, 0.2])),
        DiscreteDistribution.uniform([0.0, 1.0, 3.0]),
    ]
    kernels = [
        mean_kernel(),
        variance_kernel(2),
        variance_kernel(3),
        product_kernel(2),
        product_kernel(3),
        fix_omega(sign_flip_kernel(2), [0, 0]),
        fix_omega(sign_flip_kernel(3), [0, 0]),
    ]
    rng = np.random.default_rng(0)
    worst_var = worst_rec = 0.0
    for dist in dists:
        for kernel in kernels:
            table = build_table(kernel, dist)
            for n in range(kernel.order, 9):
                mean, var = exhaustive_variance(kernel, dist, n)
                worst_var = max(worst_var, abs(variance_decomposition(table, n) - var), abs(mean - table.theta))
                for _ in range(3):
                    idx = rng.integers(0, len(dist), size=n)
                    direct = eval_complete(kernel, dist.support[idx]).value
                    worst_rec = max(worst_rec, abs(reconstruct(table, idx) - direct))
    elapsed = time.perf_counter() - t0
    ok = worst_var <= 1e-10 and worst_rec <= 1e-10 and elapsed < 60
    return ok, f"max variance error {worst_var:.2e}, max reconstruction error {worst_rec:.2e} (tol 1e-10), {elapsed:.1f} s (< 60 s)"


def criterion_2():
    rng = np.random.default_rng(1)
    mean = EstimatorFn.of(np.mean)
    worst = 0.0
    for _ in range(100):
        y = rng.normal(loc=rng.normal(), scale=rng.uniform(0.1, 10), size=int(rng.integers(2, 51)))
        worst = max(worst, abs(jk_variance(mean, y).variance - np.var(y, ddof=1) / len(y)))
    return worst <= 1e-12, f"max |JK - S^2/n| = {worst:.2e} over 100 datasets (tol 1e-12)"


def criterion_3():
    rng = np.random.default_rng(2)
    worst = 0.0
    count = 0
    for k in (1, 2):
        for n in range(1, 11):
            for _ in range(20):
                data = RegressionDataset(rng.random((n, k)), rng.normal(size=n))
                x = rng.random(k)
                for s in range(1, min(n, 4) + 1):
                    enum = eval_complete(dnn_kernel(x, s), data.stacked()).value
                    worst = max(worst, abs(dnn_estimate(x, data, s) - enum))
                    count += 1
    return worst <= 1e-12, f"max error {worst:.2e} over {count} (dataset, s) cases (tol 1e-12)"


def criterion_4():
    t0 = time.perf_counter()
    bad = []
    cases = 0
    for s in range(1, cb.MAX_ORDERING_POINTS + 1):
        for c in range(1, s + 1):
            if 2 * s - c > cb.MAX_ORDERING_POINTS:
                continue
            cases += 1
            ss = cb.kernel_product_probability(s, c, "shared-shared")
            if ss != Fraction(1, 2 * s - c) or ss != cb.kernel_product_closed_form(s, c, "shared-shared"):
                bad.append((s, c, "shared-shared"))
            if c < s:
                for variant in ("shared-new", "new-new"):
                    if cb.kernel_product_probability(s, c, variant) != cb.kernel_product_closed_form(s, c, variant):
                        bad.append((s, c, variant))
    nn = cb.kernel_product_probability(2, 1, "new-new")
    alt = cb.kernel_product_closed_form(2, 1, "new-new", top_offset=1)
    elapsed = time.perf_counter() - t0
    ok = not bad and nn != alt and elapsed < 60
    return ok, (f"{cases} (s, c) pairs, mismatches {bad or 'none'}; new-new at (2, 1): oracle {nn}, "
                f"offset-1 form {alt}; {elapsed:.1f} s (< 60 s)")


def criterion_5():
    exact = [cb.nearest_probability(s) for s in range(1, 7)]
    exact_ok = exact == [Fraction(1, s) for s in range(1, 7)]
    s, reps = 64, 10_000
    cfg = DgpConfig()
    x1 = np.random.default_rng(5).random(reps)
    # another uniform point is closer to 0.5 with probability 2|x1 - 0.5|
    cond_kappa = (1 - 2 * np.abs(x1 - 0.5)) ** (s - 1)
    vals = cfg.mean_function(x1[:, None]) * s * cond_kappa
    est, se = vals.mean(), vals.std(ddof=1) / math.sqrt(reps)
    target = float(cfg.mean_function(np.array([[0.5]]))[0])
    ok = exact_ok and abs(est - target) <= 3 * se
    return ok, (f"E[kappa] = 1/s exact for s <= 6: {exact_ok}; MC {est:.5f} +/- {se:.5f} vs mu(0.5) = {target:.3g} "
                f"({abs(est - target) / se:.2f} SE, need <= 3)")


def criterion_6():
    cfg = _config("tdnn_default.json", experiments=["ratio"])
    rows = ratio_experiment(cfg)
    parts, ok = [], True
    for d in cfg.d_values:
        meds = [_lookup(rows, n=n, d=d, method="tdnn-JKD", metric="ratio_median") for n in cfg.n_grid]
        dev = [abs(m - 1) for m, _ in meds]
        band = 0.7 <= meds[-1][0] <= 1.3
        mono = all(b <= a for a, b in zip(dev, dev[1:]))
        ok = ok and band and mono
        shown = ", ".join(f"{m:.4f}+/-{e:.3f}" for m, e in meds)
        parts.append(f"d={d}: medians [{shown}] band {'ok' if band else 'FAIL'} "
                     f"|median-1| nonincreasing {'ok' if mono else 'FAIL'}")
    return ok, "; ".join(parts)


def criterion_7():
    cfg = _config("incomplete.json")
    rows = ratio_experiment(cfg)
    n = max(cfg.n_grid)
    bern, bern_se = _lookup(rows, n=n, d=1, method="ustat-bernoulli-JKD", metric="ratio_median")
    ht, ht_se = _lookup(rows, n=n, d=1, method="ustat-ht-JKD", metric="ratio_median")
    band = 0.6 <= bern <= 1.4
    agree = abs(ht - bern) <= 0.1 * bern
    return band and agree, (f"n={n}: N-hat median {bern:.4f}+/-{bern_se:.3f} band {'ok' if band else 'FAIL'}; "
                            f"HT median {ht:.4f}+/-{ht_se:.3f}, relative gap {abs(ht - bern) / bern:.2f} "
                            f"(need <= 0.10) {'ok' if agree else 'FAIL'}")


def criterion_8():
    cfg = _config("tdnn_default.json", experiments=["coverage"], n_grid=[500])
    rows = coverage_experiment(cfg)
    parts, ok = [], True
    for d in cfg.d_values:
        cov, se = _lookup(rows, n=500, d=d, method="tdnn-JKD", metric="coverage")
        ok = ok and 0.90 <= cov <= 0.99
        parts.append(f"d={d}: coverage {cov:.4f}+/-{se:.4f}")
    return ok, "; ".join(parts) + " (need [0.90, 0.99])"


def criterion_9():
    cfg = _config("tdnn_default.json", experiments=["dominance"], n_grid=[100, 500])
    rows = dominance_experiment(cfg)
    lo, lo_se = _lookup(rows, n=100, method="tdnn", metric="dominance_stat")
    hi, hi_se = _lookup(rows, n=500, method="tdnn", metric="dominance_stat")
    grid = [_lookup(rows, n=500, s2=s2, method="tdnn-grid", metric="s2_zeta1") for s2 in cfg.s2_grid]
    exact = [s2 * tdnn_zeta1_quadrature(max(1, math.ceil(cfg.rho * s2 - 1e-9)), s2)[0] for s2 in cfg.s2_grid]
    values = [v for v, _ in grid]
    factor = max(values) / min(values)
    ok = hi < lo and factor < 2
    shown = ", ".join(f"{v:.4f}+/-{e:.4f} (quadrature {q:.4f})" for (v, e), q in zip(grid, exact))
    return ok, (f"dominance stat {lo:.4f}+/-{lo_se:.4f} (n=100) -> {hi:.4f}+/-{hi_se:.4f} (n=500); "
                f"s2*zeta1 over s2={list(cfg.s2_grid)}: {shown}; max/min {factor:.3f} (need < 2, "
                f"quadrature {max(exact) / min(exact):.3f})")


def criterion_10():
    outputs = []
    with tempfile.TemporaryDirectory() as tmp:
        for threads in (1, 1, 8, 8):
            out = Path(tmp) / f"run{len(outputs)}"
            cmd = [sys.executable, "-m", "jackustat", "run", "--config", str(CONFIGS / "smoke.json"),
                   "--out", str(out), "--threads", str(threads)]
            proc = subprocess.run(cmd, capture_output=True, text=True, check=False)
            if proc.returncode != 0:
                return False, f"run failed with exit {proc.returncode}: {proc.stderr.strip()}"
            outputs.append({p.name: p.read_bytes() for p in sorted(out.glob("*.csv"))})
    same = all(o == outputs[0] for o in outputs)
    return same and len(outputs[0]) == 3, f"{sorted(outputs[0])} identical across 4 runs (threads 1, 1, 8, 8): {same}"


CRITERIA = {i: globals()[f"criterion_{i}"] for i in range(1, 11)}


def _report(i: int) -> tuple[bool, str]:
    passed, detail = CRITERIA[i]()
    line = f"{'PASS' if passed else 'FAIL'} criterion {i}: {detail}"
    print(line)
    return passed, line


@pytest.mark.parametrize("i", sorted(CRITERIA))
def test_criterion(i):
    from conftest import ACCEPTANCE_LINES

    passed, line = _report(i)
    ACCEPTANCE_LINES.append(line)
    assert passed, line


if __name__ == "__main__":
    results = [_report(i)[0] for i in sorted(CRITERIA)]
    sys.exit(0 if all(results) else 1)
