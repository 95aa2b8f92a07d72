from __future__ import annotations

import csv
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jackustat.errors import ConfigError
from jackustat.simulation import (
    CSV_HEADER,
    DgpConfig,
    ExperimentConfig,
    coverage_experiment,
    dgp_mean,
    dgp_sample,
    dominance_experiment,
    mc_truth_variance,
    parallel_map,
    quantile_with_se,
    ratio_experiment,
    variance_with_se,
    write_csv,
)
from jackustat.hoeffding import estimate_zeta
from jackustat.tdnn import tdnn_kernel

from oracles import tdnn_zeta1_quadrature


def test_dgp_is_deterministic_per_seed():
    cfg = DgpConfig(k=2, design="cosine")
    a, b = dgp_sample(cfg, 50, 3), dgp_sample(cfg, 50, 3)
    assert np.array_equal(a.X, b.X) and np.array_equal(a.Y, b.Y)
    assert not np.array_equal(a.Y, dgp_sample(cfg, 50, 4).Y)


def test_noise_free_linear_response_is_exact():
    cfg = DgpConfig(k=3, mu="linear", noise="homoskedastic", sigma=0.0, coef=2.5)
    data = dgp_sample(cfg, 40, 1)
    assert np.array_equal(data.Y, 2.5 * data.X.sum(axis=1))


def test_sine_product_mean():
    # E[sin(2 pi U)(1 + U)] = -1 / (2 pi) for uniform U
    cfg = DgpConfig()
    assert dgp_mean(cfg) == pytest.approx(-1 / (2 * math.pi), abs=1e-9)
    y = dgp_sample(cfg, 100_000, 0).Y
    assert abs(y.mean() + 1 / (2 * math.pi)) < 3 * y.std() / math.sqrt(len(y))


def test_cosine_design_density():
    cfg = DgpConfig(design="cosine", mu="linear", coef=1.0)
    # E[U] under 1 + cos(2 pi u) / 2 is 1/2 by symmetry; E[cos(2 pi U)] = 1/4
    u = dgp_sample(cfg, 200_000, 5).X[:, 0]
    se = 1 / math.sqrt(len(u))
    assert abs(np.cos(2 * np.pi * u).mean() - 0.25) < 4 * se
    assert dgp_mean(cfg) == pytest.approx(0.5, abs=1e-9)
    assert 0 <= u.min() and u.max() <= 1


def test_heteroskedastic_scale():
    cfg = DgpConfig(k=2)
    assert cfg.noise_scale(np.array([[0.0, 1.0]]))[0] == pytest.approx(0.625)


def test_truth_variance_of_a_constant_is_zero():
    est = mc_truth_variance(lambda data, seed: 3.0, DgpConfig(), 20, 50, 0)
    assert est.value == 0.0 and est.reps == 50


def test_truth_variance_of_sample_mean():
    cfg = DgpConfig(mu="linear", coef=0.0, noise="homoskedastic", sigma=1.0)
    est = mc_truth_variance(lambda data, seed: data.Y.mean(), cfg, 100, 2000, 1)
    assert abs(est.value - 0.01) < 4 * est.se
    with pytest.raises(ConfigError):
        mc_truth_variance(lambda data, seed: 0.0, cfg, 10, 1, 0)


def test_variance_se_against_normal_theory():
    v = np.random.default_rng(2).normal(size=4000)
    est = variance_with_se(v)
    assert est.value == pytest.approx(np.var(v, ddof=1))
    # for normal data sd(S^2) = sigma^2 sqrt(2 / (M - 1))
    assert est.se == pytest.approx(math.sqrt(2 / 3999), rel=0.1)


def test_quantile_se_against_asymptotic_formula():
    v = np.random.default_rng(3).normal(size=10_000)
    est = quantile_with_se(v, 0.5)
    density = 1 / math.sqrt(2 * math.pi)
    assert est.se == pytest.approx(math.sqrt(0.25 / 10_000) / density, rel=0.15)


@settings(max_examples=20, deadline=None)
@given(st.lists(st.integers(-100, 100), min_size=1, max_size=30), st.integers(1, 8))
def test_parallel_map_is_ordered(items, threads):
    assert parallel_map(lambda v: v * v, items, threads) == [v * v for v in items]


@pytest.mark.parametrize(
    "raw",
    [
        {"n_grid": [10], "gamma": 1.0},
        {"rho": 1.0},
        {"level": 1.5},
        {"estimator": "knn"},
        {"plan": "poisson"},
        {"experiments": ["bias"]},
        {"x": [0.5, 0.5]},
        {"d_values": [0]},
        {"dgp": {"k": 0}},
        {"dgp": {"design": "beta"}},
        {"colour": "red"},
        {"dgp": {"mu": "linear", "slope": 2}},
        {"n_grid": 100},
        {"reps": "many"},
    ],
)
def test_config_validation(raw):
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict(raw)


def test_config_roundtrip_and_orders():
    cfg = ExperimentConfig.from_dict({"n_grid": [100, 500], "dgp": {"k": 1}})
    assert ExperimentConfig.from_dict(cfg.to_dict()) == cfg
    assert cfg.orders(100) == (8, 16)
    assert cfg.orders(500) == (21, 42)
    assert cfg.truth_count == 1600
    assert ExperimentConfig(estimator="ustat-variance", gamma=0.5).orders(240) == (None, 16)
    assert ExperimentConfig(sampling_exponent=1.2).target_count(240) == math.ceil(240**1.2)


def test_coverage_with_zero_replicates_is_an_error():
    cfg = ExperimentConfig(experiments=("coverage",), reps=0, n_grid=(40,))
    with pytest.raises(ConfigError):
        coverage_experiment(cfg)
    with pytest.raises(ConfigError):
        ratio_experiment(cfg)


def test_sample_mean_experiments_are_calibrated():
    cfg = ExperimentConfig(estimator="mean", n_grid=(60,), d_values=(1,), reps=600, truth_reps=3000, seed=5)
    rows = {(r[5], r[6]): r for r in coverage_experiment(cfg)}
    cov = rows[("mean-JK", "coverage")]
    assert abs(cov[7] - 0.95) < 4 * math.sqrt(0.95 * 0.05 / 600)
    rows = {(r[5], r[6]): r for r in ratio_experiment(cfg)}
    ratio = rows[("mean-JK", "ratio_mean")]
    # E[S^2 / n] equals the true variance
    assert abs(ratio[7] - 1) < 4 * math.hypot(ratio[8], 0.03)


def _small_cfg(**kw):
    base = dict(
        experiments=("ratio", "coverage", "dominance"),
        n_grid=(30,),
        reps=6,
        truth_reps=12,
        zeta_reps=500,
        grid_zeta_reps=500,
        s2_grid=(4,),
        seed=11,
    )
    base.update(kw)
    return ExperimentConfig(**base)


def test_outputs_do_not_depend_on_threads():
    cfg = _small_cfg()
    for runner in (ratio_experiment, coverage_experiment, dominance_experiment):
        assert runner(cfg, threads=1) == runner(cfg, threads=4)


def test_incomplete_plans_share_selection_and_run():
    cfg = _small_cfg(estimator="ustat-variance", gamma=0.5, plan="both", d_values=(1,),
                     dgp=DgpConfig(mu="linear", coef=0.0, noise="homoskedastic"))
    methods = {r[5] for r in ratio_experiment(cfg)}
    assert methods == {"ustat-bernoulli", "ustat-bernoulli-JK", "ustat-bernoulli-JKD",
                       "ustat-ht", "ustat-ht-JK", "ustat-ht-JKD"}


def test_csv_format(tmp_path):
    rows = ratio_experiment(_small_cfg(d_values=(1, 2)))
    path = tmp_path / "ratio.csv"
    write_csv(rows, path)
    with open(path, newline="") as fh:
        table = list(csv.reader(fh))
    assert tuple(table[0]) == CSV_HEADER
    assert len(table) == len(rows) + 1
    sigma = [r for r in table[1:] if r[6] == "sigma2_mc"][0]
    assert sigma[4] == "" and float(sigma[7]) > 0
    assert {r[5] for r in table[1:]} == {"tdnn", "tdnn-JK", "tdnn-JKD"}
    assert all(r[9] == "11" for r in table[1:])


def test_tdnn_kernel_mean_matches_quadrature():
    theta = tdnn_zeta1_quadrature(2, 4)[1]
    cfg = DgpConfig()
    kernel = tdnn_kernel([0.5], 2, 4)
    draws = cfg.draw(np.random.default_rng(0), (400_000, 4))
    vals = kernel.evaluate_batch(draws)
    assert abs(vals.mean() - theta) < 4 * vals.std() / math.sqrt(len(vals))


@pytest.mark.parametrize("s1,s2", [(2, 4), (4, 8)])
def test_zeta1_estimate_matches_quadrature(s1, s2):
    exact = tdnn_zeta1_quadrature(s1, s2)[0]
    cfg = DgpConfig()
    est = estimate_zeta(
        tdnn_kernel([0.5], s1, s2),
        cfg.draw,
        1,
        60_000,
        3,
        completions=4,
        completion_sampler=lambda rng, shape: cfg.draw(rng, shape, noise=False),
    )
    assert abs(est.value - exact) < 4 * est.se


def test_quadrature_oracle_converges():
    for s2 in (4, 16):
        a = tdnn_zeta1_quadrature(s2 // 2, s2, 100)[0]
        b = tdnn_zeta1_quadrature(s2 // 2, s2, 200)[0]
        assert a == pytest.approx(b, rel=1e-10)
