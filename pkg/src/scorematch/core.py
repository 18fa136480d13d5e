"""Data and parameter containers shared across the package.

Parameter vectors use a fixed packing so optimizers, covariance
estimators, and reports all agree on coordinate order:

* truncated-Gaussian model: vec(B) in column-major order, then the
  lower triangle of Lambda column by column (vech),
* CMP model: regression coefficients followed by the dispersion nu.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def _check_finite(name, arr):
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or Inf")


@dataclass
class Dataset:
    """Fixed-design regression data.

    Exactly one of y_cont (n x d, positive reals) and y_count (n,
    nonnegative integers) must be present.
    """

    x: np.ndarray
    y_cont: np.ndarray | None = None
    y_count: np.ndarray | None = None

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=np.float64)
        if self.x.ndim != 2:
            raise ValueError("x must be a 2-d array (n, p_cov)")
        _check_finite("x", self.x)
        if (self.y_cont is None) == (self.y_count is None):
            raise ValueError("exactly one of y_cont / y_count required")
        if self.y_cont is not None:
            self.y_cont = np.asarray(self.y_cont, dtype=np.float64)
            if self.y_cont.ndim != 2 or self.y_cont.shape[0] != self.x.shape[0]:
                raise ValueError("y_cont must be (n, d) matching x rows")
            _check_finite("y_cont", self.y_cont)
        else:
            self.y_count = np.asarray(self.y_count, dtype=np.float64)
            if self.y_count.ndim != 1 or self.y_count.shape[0] != self.x.shape[0]:
                raise ValueError("y_count must be (n,) matching x rows")
            _check_finite("y_count", self.y_count)
            if np.any(self.y_count < 0) or np.any(self.y_count != np.round(self.y_count)):
                raise ValueError("y_count must hold nonnegative integers")

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def p_cov(self) -> int:
        return self.x.shape[1]


@dataclass
class TruncGaussParams:
    """Mean-regression matrix b (d x p_cov) and precision lam (d x d).

    lam must be symmetric to 1e-12; positive definiteness is only
    required when sampling, not for evaluating objectives.
    """

    b: np.ndarray
    lam: np.ndarray

    def __post_init__(self):
        self.b = np.atleast_2d(np.asarray(self.b, dtype=np.float64))
        self.lam = np.atleast_2d(np.asarray(self.lam, dtype=np.float64))
        d = self.lam.shape[0]
        if self.lam.shape != (d, d):
            raise ValueError("lam must be square")
        if self.b.shape[0] != d:
            raise ValueError("b rows must match lam dimension")
        if np.max(np.abs(self.lam - self.lam.T)) > 1e-12:
            raise ValueError("lam must be symmetric (tolerance 1e-12)")

    @property
    def d(self) -> int:
        return self.lam.shape[0]

    def to_vector(self) -> np.ndarray:
        return pack_tg(self.b, self.lam)

    @classmethod
    def from_vector(cls, theta, d, p_cov) -> "TruncGaussParams":
        b, lam = unpack_tg(np.asarray(theta, dtype=np.float64), d, p_cov)
        return cls(b=b, lam=lam)


@dataclass
class CmpParams:
    """CMP regression coefficients and dispersion nu >= 0."""

    beta: np.ndarray
    nu: float

    def __post_init__(self):
        self.beta = np.asarray(self.beta, dtype=np.float64).ravel()
        self.nu = float(self.nu)
        if self.nu < 0:
            raise ValueError("nu must be nonnegative")

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.beta, [self.nu]])

    @classmethod
    def from_vector(cls, theta) -> "CmpParams":
        theta = np.asarray(theta, dtype=np.float64)
        return cls(beta=theta[:-1], nu=theta[-1])


def pack_tg(b, lam) -> np.ndarray:
    """vec(B) column-major, then vech(Lambda) lower triangle column-major."""
    b = np.asarray(b, dtype=np.float64)
    lam = np.asarray(lam, dtype=np.float64)
    d = lam.shape[0]
    rows, cols = np.tril_indices(d)
    # np.tril_indices walks row-major; reorder to column-major vech
    order = np.lexsort((rows, cols))
    return np.concatenate([b.ravel(order="F"), lam[rows[order], cols[order]]])


def unpack_tg(theta, d, p_cov):
    theta = np.asarray(theta, dtype=np.float64)
    nb = d * p_cov
    b = theta[:nb].reshape(d, p_cov, order="F")
    lam = np.zeros((d, d))
    rows, cols = np.tril_indices(d)
    order = np.lexsort((rows, cols))
    lam[rows[order], cols[order]] = theta[nb:]
    lam = lam + np.tril(lam, -1).T
    return b, lam


def tg_param_names(d, p_cov):
    names = [f"B{i + 1}{j + 1}" for j in range(p_cov) for i in range(d)]
    rows, cols = np.tril_indices(d)
    order = np.lexsort((rows, cols))
    names += [f"L{rows[k] + 1}{cols[k] + 1}" for k in order]
    return names


def cmp_param_names(p_cov):
    return [f"beta{j + 1}" for j in range(p_cov)] + ["nu"]
