"""Approximate maximum likelihood for the CMP count model.

The CMP normalizing constant Z(lambda, nu) = sum_s lambda^s / (s!)^nu
has no closed form, so the likelihood baseline approximates it. Three
modes:

* TRUNCATED: partial sums extended until a geometric ratio bound
  certifies the dropped tail below the configured tolerance.
  Effectively exact; the fit is then a plain MLE.
* ASYMPTOTIC: the closed-form approximation
      log Z ~ nu * lambda^(1/nu) - (nu-1)/(2 nu) * log(lambda)
              - (nu-1)/2 * log(2 pi) - log(nu)/2,
  exact at nu = 1 and increasingly wrong as lambda^(1/nu) shrinks.
* HYBRID: the larger of the asymptotic value and a fixed short
  partial sum of the series. Every partial sum is a strict lower
  bound of Z, so the floor takes over exactly where the asymptotic
  form collapses (small dispersion with modest rates) and the
  asymptotic value stays in charge elsewhere.

Fits under HYBRID inherit the asymptotic form's finite-sample
distortion whenever the data sit in the regime where that form is a
poor approximation; reproducing that distortion is the point of this
baseline. Standard errors use the observed information, the
conventional ML report, which understates uncertainty once the
working likelihood is off.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from . import _kernels
from .core import CmpParams, Dataset
from .estimators import gsm_start
from .optimize import FitResult, NmConfig, minimize

_Z_MODES = ("TRUNCATED", "ASYMPTOTIC", "HYBRID")
_K_CAP = 1 << 22
_LGAM_CACHE: dict[int, np.ndarray] = {}


@dataclass
class AmleConfig:
    z_mode: str = "HYBRID"
    tail: float = 1e-10       # truncation tail bound, relative to Z >= 1
    floor_terms: int = 30     # partial-sum length backing the hybrid floor

    def __post_init__(self):
        if self.z_mode not in _Z_MODES:
            raise ValueError(f"z_mode must be one of {_Z_MODES}, got {self.z_mode!r}")
        if not (0.0 < self.tail <= 1e-4):
            raise ValueError("tail bound must be in (0, 1e-4]")
        if self.floor_terms < 1:
            raise ValueError("floor_terms must be at least 1")


@dataclass
class AmleFit:
    params: CmpParams
    fit: FitResult
    se: np.ndarray
    cov: np.ndarray
    loglik: float
    z_mode_used: np.ndarray | None = None   # per-observation, HYBRID only


def _lgam(k: int) -> np.ndarray:
    got = _LGAM_CACHE.get(k)
    if got is None:
        got = gammaln(np.arange(k + 1, dtype=np.float64) + 1.0)
        _LGAM_CACHE[k] = got
    return got


def _series_k(lam_max: float, nu: float, tail: float) -> int:
    """Truncation point K with certified tail mass below `tail`.

    Once the term ratio r = lam/(k+1)^nu drops under 1 the tail is
    geometrically dominated; the bound compares it against the s=0
    term, which undershoots Z, so the certificate is conservative.
    """
    if not np.isfinite(lam_max) or lam_max <= 0:
        raise ValueError("lambda must be positive and finite")
    log_tail = np.log(tail)
    k = 16
    while True:
        r = lam_max / (k + 1.0) ** nu
        if r < 1.0:
            lt_last = k * np.log(lam_max) - nu * gammaln(k + 1.0)
            if lt_last + np.log(r / (1.0 - r)) < log_tail:
                return k
        if k > _K_CAP:
            raise RuntimeError("series truncation point exceeded cap")
        k *= 2


def log_z(lam, nu, cfg: AmleConfig | None = None):
    """log Z under the configured approximation mode.

    lam may be a scalar or an array; nu is a scalar. Scalar input
    returns a float.
    """
    cfg = cfg or AmleConfig()
    lam_arr = np.atleast_1d(np.asarray(lam, dtype=np.float64))
    nu = float(nu)
    if np.any(lam_arr <= 0) or not np.all(np.isfinite(lam_arr)):
        raise ValueError("lambda must be positive and finite")
    if nu < 0:
        raise ValueError("nu must be nonnegative")
    if nu == 0.0:
        if cfg.z_mode != "TRUNCATED":
            raise ValueError("asymptotic form requires nu > 0")
        if np.any(lam_arr >= 1):
            raise ValueError("divergent series: nu = 0 requires lambda < 1")
    eta = np.log(lam_arr)

    if cfg.z_mode == "TRUNCATED":
        k = _series_k(float(lam_arr.max()), nu, cfg.tail)
        out = _kernels.cmp_logz_trunc_rows(eta, nu, k, _lgam(k))
    else:
        if np.max(eta) / nu > np.log(1e15):
            raise ValueError("lambda**(1/nu) overflows the asymptotic form")
        # straight from lambda (no exp(log) round trip) so the nu = 1 collapse
        # to log Z = lambda is bit-exact
        out = (nu * np.power(lam_arr, 1.0 / nu)
               - (nu - 1.0) / (2.0 * nu) * eta
               - (nu - 1.0) * 0.9189385332046727
               - 0.5 * np.log(nu))
        if cfg.z_mode == "HYBRID":
            floor = _kernels.cmp_logz_trunc_rows(
                eta, nu, cfg.floor_terms, _lgam(cfg.floor_terms))
            out = np.maximum(out, floor)
    return float(out[0]) if np.isscalar(lam) or np.ndim(lam) == 0 else out


def _fd_hessian(fun, theta, rel_step=1e-4):
    theta = np.asarray(theta, dtype=np.float64)
    p = theta.size
    h = rel_step * (1.0 + np.abs(theta))
    f0 = fun(theta)
    hess = np.zeros((p, p))

    def at(*bumps):
        t = theta.copy()
        for j, s_ in bumps:
            t[j] += s_ * h[j]
        return fun(t)

    for j in range(p):
        hess[j, j] = (at((j, 1)) - 2.0 * f0 + at((j, -1))) / h[j] ** 2
        for k in range(j + 1, p):
            v = (at((j, 1), (k, 1)) - at((j, 1), (k, -1))
                 - at((j, -1), (k, 1)) + at((j, -1), (k, -1))) / (4.0 * h[j] * h[k])
            hess[j, k] = hess[k, j] = v
    return hess


def amle_fit(dataset: Dataset, cfg: AmleConfig | None = None,
             nm: NmConfig | None = None, theta0=None,
             fix_nu: float | None = None) -> AmleFit:
    """Maximize the approximate CMP log-likelihood.

    Free fits optimize (beta, log nu) so the dispersion stays
    positive; fix_nu pins the dispersion and optimizes beta only
    (its reported uncertainty is then zero by assumption).
    """
    if dataset.y_count is None:
        raise ValueError("amle_fit needs count responses")
    cfg = cfg or AmleConfig()
    if fix_nu is not None and fix_nu <= 0:
        raise ValueError("fix_nu must be positive")
    y = dataset.y_count
    x = dataset.x
    n = dataset.n
    lgam_y = gammaln(y + 1.0)
    lg_floor = _lgam(cfg.floor_terms)

    def mean_nll(beta, nu):
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            eta = x @ beta
            if cfg.z_mode == "TRUNCATED":
                emax = eta.max()
                if not np.isfinite(emax):
                    return np.inf
                try:
                    k = _series_k(float(np.exp(emax)), nu, cfg.tail)
                except (RuntimeError, ValueError, OverflowError):
                    return np.inf
                logz = _kernels.cmp_logz_trunc_rows(eta, nu, k, _lgam(k))
            elif cfg.z_mode == "HYBRID":
                logz = _kernels.cmp_logz_asym_floored_rows(
                    eta, nu, lg_floor, cfg.floor_terms)
            else:
                logz = _kernels.cmp_logz_asym_rows(eta, nu)
            return -np.mean(y * eta - nu * lgam_y - logz)

    if theta0 is None:
        theta0 = gsm_start(dataset)
    theta0 = np.asarray(theta0, dtype=np.float64)

    if fix_nu is None:
        if theta0[-1] <= 0:
            raise ValueError("starting dispersion must be positive")
        u0 = np.concatenate([theta0[:-1], [np.log(theta0[-1])]])
        raw = minimize(lambda u: mean_nll(u[:-1], np.exp(u[-1])), u0, nm)
        nu_hat = float(np.exp(raw.theta_hat[-1]))
        beta_hat = raw.theta_hat[:-1]
    else:
        nu_hat = float(fix_nu)
        raw = minimize(lambda b: mean_nll(b, nu_hat), theta0[:-1], nm)
        beta_hat = raw.theta_hat

    theta_hat = np.concatenate([beta_hat, [nu_hat]])
    fit = FitResult(theta_hat=theta_hat, objective=raw.objective,
                    iterations=raw.iterations, converged=raw.converged,
                    function_evals=raw.function_evals)

    # observed information of the total negative log-likelihood
    if fix_nu is None:
        hess = _fd_hessian(lambda t: mean_nll(t[:-1], t[-1]), theta_hat)
    else:
        hess = _fd_hessian(lambda b: mean_nll(b, nu_hat), beta_hat)
    try:
        cov_core = np.linalg.inv(hess) / n
    except np.linalg.LinAlgError as exc:
        raise RuntimeError("observed information is singular at the fit") from exc
    if fix_nu is None:
        cov = cov_core
    else:
        cov = np.zeros((theta_hat.size, theta_hat.size))
        cov[:-1, :-1] = cov_core
    with np.errstate(invalid="ignore"):
        se = np.sqrt(np.diag(cov))

    flags = None
    if cfg.z_mode == "HYBRID":
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            eta_hat = x @ beta_hat
            asym = _kernels.cmp_logz_asym_rows(eta_hat, nu_hat)
            floor = _kernels.cmp_logz_trunc_rows(
                eta_hat, nu_hat, cfg.floor_terms, lg_floor)
        flags = np.where(asym >= floor, "ASYMPTOTIC", "TRUNCATED")

    return AmleFit(params=CmpParams(beta=beta_hat, nu=nu_hat), fit=fit,
                   se=se, cov=cov, loglik=-n * fit.objective,
                   z_mode_used=flags)
