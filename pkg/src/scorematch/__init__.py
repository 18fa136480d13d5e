"""Regression estimators for models with intractable normalizing
constants: score matching for positive continuous responses under a
log-transformed truncated-Gaussian model, a forward-difference
generalized score matching estimator for CMP counts, sandwich and
bootstrap inference, exact samplers, and an approximate-MLE baseline
whose asymptotic shortcut is reproduced on purpose.
"""

from ._kernels import ACTIVE_BACKEND
from .amle import AmleConfig, AmleFit, amle_fit, log_z
from .core import (CmpParams, Dataset, TruncGaussParams, cmp_param_names,
                   pack_tg, tg_param_names, unpack_tg)
from .estimators import GsmFit, SmFit, fit_gsm, fit_sm, gsm_start
from .experiments import (McReport, McRow, bootstrap_ci, cmp_design,
                          cmp_truth, pit_pairs, run_mc, simulate_dataset,
                          tg_design, tg_truth, train_test_mse)
from .inference import (CiTable, SandwichCovariance, bootstrap_percentile,
                        sandwich, sandwich_from_grads, wald_table)
from .objective import (gsm_gradient, gsm_objective, rho_gsm_multi_rows,
                        rho_gsm_rows, rho_tg_generic_rows, rho_tg_rows,
                        t_transform, tg_gradient, tg_objective,
                        tg_quadratic_solve)
from .optimize import FitResult, NmConfig, minimize
from .sampling import (CmpDistTable, RngStream, cmp_cdf_matrix, cmp_mean,
                       cmp_mean_rows, cmp_sample, cmp_sample_rows, cmp_table,
                       mvn_sample, pit_values, tg_sample)

__version__ = "0.1.0"

__all__ = [
    "ACTIVE_BACKEND", "AmleConfig", "AmleFit", "amle_fit", "log_z",
    "CmpParams", "Dataset", "TruncGaussParams", "cmp_param_names", "pack_tg",
    "tg_param_names", "unpack_tg", "GsmFit", "SmFit", "fit_gsm", "fit_sm",
    "gsm_start", "McReport", "McRow", "bootstrap_ci", "cmp_design",
    "cmp_truth", "pit_pairs", "run_mc", "simulate_dataset", "tg_design",
    "tg_truth", "train_test_mse", "CiTable", "SandwichCovariance",
    "bootstrap_percentile", "sandwich", "sandwich_from_grads", "wald_table",
    "gsm_gradient", "gsm_objective", "rho_gsm_multi_rows", "rho_gsm_rows",
    "rho_tg_generic_rows", "rho_tg_rows", "t_transform", "tg_gradient",
    "tg_objective", "tg_quadratic_solve",
    "FitResult", "NmConfig", "minimize", "CmpDistTable", "RngStream",
    "cmp_cdf_matrix", "cmp_mean", "cmp_mean_rows", "cmp_sample",
    "cmp_sample_rows", "cmp_table", "mvn_sample", "pit_values", "tg_sample",
    "__version__",
]
