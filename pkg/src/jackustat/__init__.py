"""Generalized U-statistics, their Hoeffding decomposition, and jackknife variance estimation.

Includes distributional nearest-neighbour (DNN and two-scale TDNN)
regression with jackknife confidence intervals, plus a seeded simulation
harness.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .hoeffding import (
    DiscreteDistribution,
    DominanceDiagnostic,
    HoeffdingTable,
    build_table,
    dominance_stat,
    estimate_zeta,
    hajek_ratio,
    sampling_stat,
    variance_decomposition,
)
from .jackknife import EstimatorFn, JackknifeReport, jk_variance, jkd_variance
from .tdnn import (
    InferenceResult,
    RegressionDataset,
    TdnnConfig,
    dnn_estimate,
    dnn_weights,
    rank_order,
    studentized_ci,
    tdnn_estimate,
    tdnn_jackknife,
    tdnn_weights,
)
from .ustat import Kernel, SamplingPlan, UStatistic, eval_complete, eval_ht, eval_incomplete

__all__ = [
    "DiscreteDistribution",
    "DominanceDiagnostic",
    "EstimatorFn",
    "HoeffdingTable",
    "InferenceResult",
    "JackknifeReport",
    "Kernel",
    "RegressionDataset",
    "SamplingPlan",
    "TdnnConfig",
    "UStatistic",
    "build_table",
    "dnn_estimate",
    "dnn_weights",
    "dominance_stat",
    "estimate_zeta",
    "eval_complete",
    "eval_ht",
    "eval_incomplete",
    "hajek_ratio",
    "jk_variance",
    "jkd_variance",
    "rank_order",
    "sampling_stat",
    "studentized_ci",
    "tdnn_estimate",
    "tdnn_jackknife",
    "tdnn_weights",
    "variance_decomposition",
]
