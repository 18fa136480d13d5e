"""Uncertainty quantification for the matching estimators.

The covariance of an M-estimator that minimizes an average statistic
rho is the sandwich I^{-1} + I^{-1} J I^{-1} built from

    I = -(1/n) sum_i H_i,     J = (1/n) sum_i (g_i g_i' + H_i),

with g_i and H_i the per-observation gradient and Hessian of rho_i at
the fit. Gradients are analytic; Hessians come from central finite
differences of those gradients. Wald tables and a parametric
percentile bootstrap sit on top.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from .core import Dataset
from .objective import gsm_grad_rows, tg_grad_rows
from .sampling import STREAM_BOOT, RngStream

_COND_LIMIT = 1e12


@dataclass
class SandwichCovariance:
    i_hat: np.ndarray
    j_hat: np.ndarray
    sigma_hat: np.ndarray
    n: int

    @property
    def asd(self) -> np.ndarray:
        """Asymptotic standard deviation of each coordinate of the fit."""
        return np.sqrt(np.diag(self.sigma_hat) / self.n)


@dataclass
class CiTable:
    names: list
    estimate: np.ndarray
    se: np.ndarray
    t_abs: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    method: str
    level: float


def sandwich_from_grads(theta_hat, grad_rows_fn, rel_step=1e-5) -> SandwichCovariance:
    """Sandwich covariance from a per-row gradient callable.

    grad_rows_fn(theta) returns the (n, p) matrix of per-observation
    gradients. Per-row Hessians use central differences of that
    callable with step rel_step*(1+|theta_k|).
    """
    theta_hat = np.asarray(theta_hat, dtype=np.float64)
    g = np.asarray(grad_rows_fn(theta_hat))
    n, p = g.shape
    hess = np.empty((n, p, p))
    for k in range(p):
        h = rel_step * (1.0 + abs(theta_hat[k]))
        tp = theta_hat.copy()
        tm = theta_hat.copy()
        tp[k] += h
        tm[k] -= h
        hess[:, :, k] = (grad_rows_fn(tp) - grad_rows_fn(tm)) / (2.0 * h)
    hess = 0.5 * (hess + np.transpose(hess, (0, 2, 1)))

    i_hat = -hess.mean(axis=0)
    j_hat = (np.einsum("ni,nj->ij", g, g) / n) + hess.mean(axis=0)
    cond = np.linalg.cond(i_hat)
    if not np.isfinite(cond) or cond > _COND_LIMIT:
        raise ValueError(
            f"information matrix near-singular (condition number {cond:.3g}); "
            "the model may be unidentifiable or n too small")
    i_inv = np.linalg.inv(i_hat)
    sigma = i_inv + i_inv @ j_hat @ i_inv
    sigma = 0.5 * (sigma + sigma.T)
    return SandwichCovariance(i_hat=i_hat, j_hat=j_hat, sigma_hat=sigma, n=n)


def sandwich(theta_hat, dataset: Dataset, kind: str,
             rel_step=1e-5) -> SandwichCovariance:
    """Sandwich covariance for a fitted model; kind is 'sm' or 'gsm'."""
    if kind == "sm":
        d = dataset.y_cont.shape[1]
        p_cov = dataset.p_cov
        fn = lambda t: tg_grad_rows(t, dataset, d, p_cov)
    elif kind == "gsm":
        fn = lambda t: gsm_grad_rows(t, dataset)
    else:
        raise ValueError("kind must be 'sm' or 'gsm'")
    return sandwich_from_grads(theta_hat, fn, rel_step=rel_step)


def wald_table(theta_hat, se, level: float = 0.95, names=None) -> CiTable:
    """Symmetric normal-quantile intervals from standard errors.

    se may be a SandwichCovariance (its asd is used) or a vector.
    """
    if not (0.0 < level < 1.0):
        raise ValueError("level must be inside (0, 1)")
    theta_hat = np.asarray(theta_hat, dtype=np.float64)
    if isinstance(se, SandwichCovariance):
        se = se.asd
    se = np.asarray(se, dtype=np.float64)
    z = norm.ppf(0.5 * (1.0 + level))
    if names is None:
        names = [f"theta{k + 1}" for k in range(theta_hat.size)]
    with np.errstate(divide="ignore", invalid="ignore"):
        t_abs = np.abs(theta_hat) / se
    return CiTable(names=list(names), estimate=theta_hat, se=se, t_abs=t_abs,
                   lo=theta_hat - z * se, hi=theta_hat + z * se,
                   method="WALD", level=level)


def bootstrap_percentile(theta_hat, simulate_fn, refit_fn, b: int = 1000,
                         level: float = 0.95, seed: int = 0,
                         names=None) -> CiTable:
    """Parametric percentile bootstrap on the fixed design.

    simulate_fn(rng) draws one dataset from the fitted model;
    refit_fn(dataset) returns a parameter vector. Replicate r uses the
    stream (seed, STREAM_BOOT + r), so results are reproducible and
    independent of evaluation order. Failed refits are skipped; more
    than 5% of them is an error.
    """
    if not (0.0 < level < 1.0):
        raise ValueError("level must be inside (0, 1)")
    theta_hat = np.asarray(theta_hat, dtype=np.float64)
    draws = []
    failed = 0
    for r in range(1, b + 1):
        rng = RngStream(seed, STREAM_BOOT + r)
        try:
            draws.append(np.asarray(refit_fn(simulate_fn(rng)), dtype=np.float64))
        except Exception:
            failed += 1
    if failed > 0.05 * b:
        raise RuntimeError(f"{failed} of {b} bootstrap refits failed")
    samples = np.vstack(draws)
    alpha = 0.5 * (1.0 - level)
    lo = np.quantile(samples, alpha, axis=0, method="linear")
    hi = np.quantile(samples, 1.0 - alpha, axis=0, method="linear")
    se = samples.std(axis=0, ddof=1)
    if names is None:
        names = [f"theta{k + 1}" for k in range(theta_hat.size)]
    with np.errstate(divide="ignore", invalid="ignore"):
        t_abs = np.abs(theta_hat) / se
    return CiTable(names=list(names), estimate=theta_hat, se=se, t_abs=t_abs,
                   lo=lo, hi=hi, method="BOOT_PERCENTILE", level=level)
