"""Fitting entry points for the two score-matching estimators.

After the substitution (Lambda, H) = (Lambda, Lambda B) the
truncated-Gaussian objective is a convex quadratic, so its exact
minimizer comes from one linear solve; the simplex run afterwards is
a cheap polish that also produces convergence diagnostics. The count
objective has no such structure and is minimized directly, with the
dispersion kept on the log scale so every iterate stays positive.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import CmpParams, Dataset, TruncGaussParams, unpack_tg
from .objective import gsm_objective, tg_objective, tg_quadratic_solve
from .optimize import FitResult, NmConfig, minimize


@dataclass
class SmFit:
    params: TruncGaussParams
    fit: FitResult
    lam_definite: bool


@dataclass
class GsmFit:
    params: CmpParams
    fit: FitResult


def fit_sm(dataset: Dataset, cfg: NmConfig | None = None, theta0=None) -> SmFit:
    """Score-matching fit of the truncated-Gaussian regression model.

    The reported precision matrix is checked for positive definiteness
    (needed before the fit can be used to simulate).
    """
    if dataset.y_cont is None:
        raise ValueError("fit_sm needs continuous responses")
    d = dataset.y_cont.shape[1]
    p_cov = dataset.p_cov
    if theta0 is None:
        theta0 = tg_quadratic_solve(dataset, d, p_cov)

    def f(t):
        with np.errstate(over="ignore", invalid="ignore"):
            return tg_objective(t, dataset, d, p_cov)

    fit = minimize(f, theta0, cfg)
    b, lam = unpack_tg(fit.theta_hat, d, p_cov)
    try:
        np.linalg.cholesky(lam)
        definite = True
    except np.linalg.LinAlgError:
        definite = False
    return SmFit(params=TruncGaussParams(b=b, lam=lam), fit=fit, lam_definite=definite)


def gsm_start(dataset: Dataset) -> np.ndarray:
    """Default start: least squares of log1p(counts), unit dispersion."""
    beta0, *_ = np.linalg.lstsq(dataset.x, np.log1p(dataset.y_count), rcond=None)
    return np.concatenate([beta0, [1.0]])


def fit_gsm(dataset: Dataset, cfg: NmConfig | None = None, theta0=None) -> GsmFit:
    """Generalized score-matching fit of the CMP count regression.

    theta0 is (beta..., nu) with nu > 0; defaults to gsm_start.
    """
    if dataset.y_count is None:
        raise ValueError("fit_gsm needs count responses")
    if theta0 is None:
        theta0 = gsm_start(dataset)
    theta0 = np.asarray(theta0, dtype=np.float64)
    if theta0[-1] <= 0:
        raise ValueError("starting dispersion must be positive")
    u0 = np.concatenate([theta0[:-1], [np.log(theta0[-1])]])

    def f(u):
        theta = np.concatenate([u[:-1], [np.exp(u[-1])]])
        with np.errstate(over="ignore", invalid="ignore"):
            return gsm_objective(theta, dataset)

    raw = minimize(f, u0, cfg)
    theta_hat = np.concatenate([raw.theta_hat[:-1], [np.exp(raw.theta_hat[-1])]])
    fit = FitResult(theta_hat=theta_hat, objective=raw.objective,
                    iterations=raw.iterations, converged=raw.converged,
                    function_evals=raw.function_evals)
    return GsmFit(params=CmpParams(beta=theta_hat[:-1], nu=theta_hat[-1]), fit=fit)
