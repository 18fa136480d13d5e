"""Model definitions: unnormalized log densities and the sample-space
derivatives the score-matching objectives consume.

Continuous model: a d-variate Gaussian truncated to the positive
orthant, observed after a log transform. With y the original-scale
response, s = y - Bx, and Lambda the precision,

    log p~(y~) = sum_j y~_j - 0.5 * s' Lambda s,   y = exp(y~).

Count model: Conway-Maxwell-Poisson regression with rate
lambda_i = exp(x_i' beta) and dispersion nu,

    log p~(y) = y * eta - nu * lgamma(y + 1).
"""

from __future__ import annotations

import numpy as np
from scipy.special import gammaln

from .core import CmpParams, Dataset, TruncGaussParams


class TruncGaussModel:
    """Log-transformed positive-orthant truncated Gaussian."""

    continuous = True

    def log_unnorm(self, params: TruncGaussParams, dataset: Dataset) -> np.ndarray:
        ytil = np.log(dataset.y_cont)
        s = dataset.y_cont - dataset.x @ params.b.T
        quad = np.einsum("ij,jk,ik->i", s, params.lam, s)
        return ytil.sum(axis=1) - 0.5 * quad

    def grad_y(self, params: TruncGaussParams, dataset: Dataset) -> np.ndarray:
        """d log p~ / d y~_j per row, shape (n, d)."""
        y = dataset.y_cont
        s = y - dataset.x @ params.b.T
        v = s @ params.lam           # Lambda symmetric
        return 1.0 - y * v

    def laplacian_y(self, params: TruncGaussParams, dataset: Dataset) -> np.ndarray:
        """sum_j d^2 log p~ / d y~_j^2 per row, shape (n,)."""
        y = dataset.y_cont
        s = y - dataset.x @ params.b.T
        v = s @ params.lam
        return np.sum(-y * v - y * y * np.diag(params.lam), axis=1)


class CmpModel:
    """Conway-Maxwell-Poisson count regression."""

    continuous = False

    def log_unnorm(self, params: CmpParams, dataset: Dataset) -> np.ndarray:
        y = dataset.y_count
        eta = dataset.x @ params.beta
        return y * eta - params.nu * gammaln(y + 1.0)

    def forward_ratio(self, params: CmpParams, dataset: Dataset) -> np.ndarray:
        """p~(y+1)/p~(y) = lambda / (y+1)^nu per row."""
        y = dataset.y_count
        lam = np.exp(dataset.x @ params.beta)
        return lam / np.power(y + 1.0, params.nu)

    def backward_ratio(self, params: CmpParams, dataset: Dataset) -> np.ndarray:
        """p~(y)/p~(y-1) = lambda / y^nu; +inf at y = 0 so the
        transformed backward term vanishes there for every nu."""
        y = dataset.y_count
        lam = np.exp(dataset.x @ params.beta)
        out = np.full(y.shape, np.inf)
        pos = y > 0
        out[pos] = lam[pos] / np.power(y[pos], params.nu)
        return out
