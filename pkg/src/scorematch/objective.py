"""Score-matching objectives and their analytic gradients.

The estimators minimize the empirical mean of a per-observation
statistic rho that involves only the unnormalized model:

* continuous data: rho = 2 * laplacian(log p~) + |grad(log p~)|^2,
  with derivatives taken on the transformed (log) response scale.
  For the truncated-Gaussian model this has a closed form that
  differs from the generic expression by exactly the response
  dimension d, so both are provided.

* counts: rho = t_f^2 + t_b^2 - 2 t_f with t(u) = 1/(1+u) applied to
  the forward and backward probability ratios; t_b = 0 at y = 0.
  rho is bounded in [-1, 2] by construction.

Gradients are with respect to the packed parameter vector. Per-row
gradient matrices are exposed for sandwich covariance estimation.
"""

from __future__ import annotations

import numpy as np

from . import _kernels
from .core import CmpParams, Dataset, TruncGaussParams, pack_tg, unpack_tg
from .models import CmpModel, TruncGaussModel


def t_transform(u):
    """t(u) = 1/(1+u) on [0, +inf], with t(+inf) = 0 exactly.

    Strictly decreasing, maps probability ratios into [0, 1]. Rejects
    negative or NaN input rather than returning a value outside the
    range the objectives assume.
    """
    arr = np.asarray(u, dtype=np.float64)
    if np.any(np.isnan(arr)):
        raise ValueError("t_transform: NaN input")
    if np.any(arr < 0.0):
        raise ValueError("t_transform: negative input")
    with np.errstate(divide="ignore"):
        out = np.where(np.isinf(arr), 0.0, 1.0 / (1.0 + arr))
    return float(out) if np.isscalar(u) or arr.ndim == 0 else out


# ---------------------------------------------------------------- TG

def rho_tg_rows(params: TruncGaussParams, dataset: Dataset) -> np.ndarray:
    """Closed-form rho per observation."""
    xb = dataset.x @ params.b.T
    return _kernels.tg_rho_rows(dataset.y_cont, xb, params.lam)


def rho_tg_generic_rows(params: TruncGaussParams, dataset: Dataset) -> np.ndarray:
    """Generic rho from model derivatives; equals the closed form
    plus the constant d."""
    model = TruncGaussModel()
    g = model.grad_y(params, dataset)
    lap = model.laplacian_y(params, dataset)
    return 2.0 * lap + np.sum(g * g, axis=1)


def tg_objective(theta, dataset: Dataset, d: int, p_cov: int) -> float:
    b, lam = unpack_tg(theta, d, p_cov)
    xb = dataset.x @ b.T
    return float(np.mean(_kernels.tg_rho_rows(dataset.y_cont, xb, lam)))


def tg_grad_rows(theta, dataset: Dataset, d: int, p_cov: int) -> np.ndarray:
    b, lam = unpack_tg(theta, d, p_cov)
    xb = dataset.x @ b.T
    return _kernels.tg_grad_rows(dataset.y_cont, dataset.x, xb, lam)


def tg_gradient(theta, dataset: Dataset, d: int, p_cov: int) -> np.ndarray:
    return np.mean(tg_grad_rows(theta, dataset, d, p_cov), axis=0)


def tg_quadratic_solve(dataset: Dataset, d: int, p_cov: int) -> np.ndarray:
    """Exact minimizer of the closed-form objective.

    In the reparameterization (Lambda, H = Lambda B) the objective is a
    convex quadratic, so the global minimum follows from one linear
    solve; B is recovered as Lambda^{-1} H. Returns the packed vector.
    """
    y = dataset.y_cont
    x = dataset.x
    n = y.shape[0]
    nvech = d * (d + 1) // 2
    dim = nvech + d * p_cov

    # coordinates: vech(Lambda) column-major, then vec(H) column-major
    def vech_index(r_, c):
        # lower-triangle (r_ >= c), columns first
        return sum(d - m for m in range(c)) + (r_ - c)

    # rows of the least-squares stack: for each j, (Lambda t - H x)_j
    # weighted by y_j enters the PSD term; linear terms assembled below
    a = np.zeros((n * d, dim))
    for j in range(d):
        blk = slice(j * n, (j + 1) * n)
        for k in range(d):
            r_, c = max(j, k), min(j, k)
            a[blk, vech_index(r_, c)] += y[:, j] * y[:, k]
        for c in range(p_cov):
            a[blk, nvech + c * d + j] = -y[:, j] * x[:, c]
    lin = np.zeros(dim)
    for j in range(d):
        for k in range(d):
            r_, c = max(j, k), min(j, k)
            lin[vech_index(r_, c)] += np.mean(-4.0 * y[:, j] * y[:, k])
        lin[vech_index(j, j)] += np.mean(-2.0 * y[:, j] * y[:, j])
    for c in range(p_cov):
        for j in range(d):
            lin[nvech + c * d + j] = np.mean(4.0 * y[:, j] * x[:, c])

    m = (a.T @ a) / n
    phi = np.linalg.solve(2.0 * m, -lin)
    lam = np.zeros((d, d))
    rows, cols = np.tril_indices(d)
    order = np.lexsort((rows, cols))
    lam[rows[order], cols[order]] = phi[:nvech]
    lam = lam + np.tril(lam, -1).T
    h = phi[nvech:].reshape(d, p_cov, order="F")
    b = np.linalg.solve(lam, h)
    return pack_tg(b, lam)


# ---------------------------------------------------------------- GSM

def rho_gsm_rows(params: CmpParams, dataset: Dataset) -> np.ndarray:
    eta = dataset.x @ params.beta
    return _kernels.gsm_rho_rows(dataset.y_count, eta, params.nu)


def rho_gsm_multi_rows(forward_ratios, backward_ratios) -> np.ndarray:
    """Count-data rho for d coordinates from per-coordinate probability
    ratios, summed over coordinates.

    Callers supply the boundary conventions in the ratios themselves:
    +inf backward ratio at a zero count (t -> 0), zero forward ratio at
    an upper support edge (t -> 1). For d = 1 on the CMP model this
    reduces to the kernel evaluation; for a product of independent
    coordinates it is the sum of the univariate values.
    """
    tf = np.asarray(t_transform(forward_ratios))
    tb = np.asarray(t_transform(backward_ratios))
    if tf.ndim == 1:                      # (n,) means one coordinate
        tf = tf[:, None]
        tb = tb[:, None]
    return np.sum(tf * tf + tb * tb - 2.0 * tf, axis=1)


def gsm_objective(theta, dataset: Dataset) -> float:
    theta = np.asarray(theta, dtype=np.float64)
    eta = dataset.x @ theta[:-1]
    return float(np.mean(_kernels.gsm_rho_rows(dataset.y_count, eta, theta[-1])))


def gsm_grad_rows(theta, dataset: Dataset) -> np.ndarray:
    theta = np.asarray(theta, dtype=np.float64)
    eta = dataset.x @ theta[:-1]
    return _kernels.gsm_grad_rows(dataset.y_count, dataset.x, eta, theta[-1])


def gsm_gradient(theta, dataset: Dataset) -> np.ndarray:
    """Mean analytic gradient; falls back to central finite differences
    on the nu = 0 boundary where the analytic dispersion derivative is
    not taken."""
    theta = np.asarray(theta, dtype=np.float64)
    if theta[-1] == 0.0:
        return fd_gradient(lambda t: gsm_objective(t, dataset), theta)
    return np.mean(gsm_grad_rows(theta, dataset), axis=0)


def fd_gradient(fun, theta, rel_step=1e-6) -> np.ndarray:
    theta = np.asarray(theta, dtype=np.float64)
    g = np.zeros_like(theta)
    for k in range(theta.size):
        h = rel_step * (1.0 + abs(theta[k]))
        tp = theta.copy()
        tm = theta.copy()
        tp[k] += h
        tm[k] -= h
        g[k] = (fun(tp) - fun(tm)) / (2.0 * h)
    return g
