"""Seeded sampling utilities.

Streams are counter-based (Philox) and keyed by (master_seed,
stream_id), so any replicate can be regenerated in isolation and
results do not depend on execution order or thread count.

CMP variates are drawn by inversion of a truncated cdf table whose
tail mass is certified below 1e-12 by a geometric ratio bound, making
the draws exact to machine precision; the truncated-Gaussian
responses come from rejection of multivariate normal proposals into
the positive orthant.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .core import Dataset, TruncGaussParams

_TAIL_TOL = 1e-12
_K_CAP = 1 << 22

# Stream-id bases partition the (master_seed, stream_id) space so
# design draws, replicate draws, bootstrap draws, and diagnostics can
# never collide within one master seed.
STREAM_DESIGN = 0
STREAM_REP_TG = 1 << 32
STREAM_REP_CMP = 2 << 32
STREAM_BOOT = 3 << 32
STREAM_PIT = 4 << 32
STREAM_SPLIT = 5 << 32


class RngStream:
    """One independent random stream per (master_seed, stream_id)."""

    def __init__(self, master_seed: int, stream_id: int):
        self.master_seed = int(master_seed)
        self.stream_id = int(stream_id)
        self.generator = np.random.Generator(
            np.random.Philox(key=[self.master_seed, self.stream_id]))

    def uniform(self, size=None):
        return self.generator.random(size)

    def normal(self, size=None):
        return self.generator.standard_normal(size)


@dataclass
class CmpDistTable:
    lam: float
    nu: float
    k: int
    log_z: float
    cdf: np.ndarray


def _cmp_log_terms(lam, nu, k):
    s = np.arange(k + 1, dtype=np.float64)
    return s * np.log(lam) - nu * gammaln(s + 1.0)


def cmp_table(lam, nu) -> CmpDistTable:
    """Tail-bounded distribution table for CMP(lam, nu).

    The truncation point K grows until the ratio test certifies the
    remaining mass below 1e-12 of the partial sum: once
    r = lam/(K+1)^nu < 1 the tail is at most p(K) * r / (1 - r).
    """
    lam = float(lam)
    nu = float(nu)
    if lam <= 0:
        raise ValueError("lambda must be positive")
    if nu < 0:
        raise ValueError("nu must be nonnegative")
    if nu == 0 and lam >= 1:
        raise ValueError(f"divergent series: nu = 0 requires lambda < 1, got lambda = {lam}")
    if nu > 0 and np.log(lam) / nu > np.log(1e15):
        raise ValueError("lambda**(1/nu) overflows the table construction")

    k = 16
    while True:
        lt = _cmp_log_terms(lam, nu, k)
        m = lt.max()
        terms = np.exp(lt - m)
        part = np.sum(terms)
        r = lam / (k + 1.0) ** nu
        if r < 1.0 and terms[-1] * r / (1.0 - r) < _TAIL_TOL * part:
            break
        if k > _K_CAP:
            raise RuntimeError("CMP table truncation point exceeded cap")
        k *= 2
    log_z = m + np.log(part)
    pmf = terms / part
    # cumsum may overshoot 1 by an ulp; keep the cdf monotone
    cdf = np.minimum(np.cumsum(pmf), 1.0)
    cdf[-1] = 1.0
    return CmpDistTable(lam=lam, nu=nu, k=k, log_z=log_z, cdf=cdf)


def cmp_sample(table: CmpDistTable, rng: RngStream, size=None):
    """Inversion sampling from a table; returns float counts.

    y = min{j : F(j) >= u}, matching the row-vectorized sampler."""
    u = rng.uniform(size)
    return np.searchsorted(table.cdf, u, side="left").astype(np.float64)


def cmp_mean(table: CmpDistTable) -> float:
    pmf = np.diff(table.cdf, prepend=0.0)
    return float(pmf @ np.arange(table.k + 1, dtype=np.float64))


def cmp_cdf_matrix(lam_vec, nu):
    """Shared-truncation cdf rows for heterogeneous lambdas.

    Returns (cdf matrix (n, K+1), log_z vector). Used by the Monte
    Carlo harness, PIT, and prediction, where one K per dataset is
    cheaper than n adaptive tables.
    """
    lam_vec = np.asarray(lam_vec, dtype=np.float64)
    nu = float(nu)
    if np.any(lam_vec <= 0):
        raise ValueError("lambda must be positive")
    if nu == 0 and np.any(lam_vec >= 1):
        raise ValueError("divergent series: nu = 0 requires lambda < 1")
    lmax = lam_vec.max()
    if nu > 0 and np.log(lmax) / nu > np.log(1e15):
        raise ValueError("lambda**(1/nu) overflows the table construction")
    k = 16
    while True:
        r = lmax / (k + 1.0) ** nu
        if r < 1.0:
            lt_last = k * np.log(lmax) - nu * gammaln(k + 1.0)
            # conservative: compare worst-row tail against its s=0 term (1)
            if lt_last + np.log(r / (1.0 - r)) < np.log(_TAIL_TOL):
                break
        if k > _K_CAP:
            raise RuntimeError("CMP table truncation point exceeded cap")
        k *= 2
    s = np.arange(k + 1, dtype=np.float64)
    lt = np.outer(np.log(lam_vec), s) - nu * gammaln(s + 1.0)
    m = lt.max(axis=1, keepdims=True)
    terms = np.exp(lt - m)
    part = terms.sum(axis=1, keepdims=True)
    log_z = m[:, 0] + np.log(part[:, 0])
    cdf = np.minimum(np.cumsum(terms / part, axis=1), 1.0)
    cdf[:, -1] = 1.0
    return cdf, log_z


def cmp_sample_rows(lam_vec, nu, rng: RngStream):
    """One CMP draw per row of lam_vec."""
    cdf, _ = cmp_cdf_matrix(lam_vec, nu)
    u = rng.uniform(lam_vec.shape[0])
    return (u[:, None] > cdf).sum(axis=1).astype(np.float64)


def cmp_sample_from_cdf(cdf, rng: RngStream):
    """Row draws from a precomputed cdf matrix (same inversion rule as
    cmp_sample_rows; split out so the fixed-parameter cdf can be reused
    across replicates)."""
    u = rng.uniform(cdf.shape[0])
    return (u[:, None] > cdf).sum(axis=1).astype(np.float64)


def cmp_mean_rows(lam_vec, nu):
    """Exact mean of CMP(lam_i, nu) for each row."""
    cdf, _ = cmp_cdf_matrix(lam_vec, nu)
    pmf = np.diff(cdf, axis=1, prepend=0.0)
    return pmf @ np.arange(cdf.shape[1], dtype=np.float64)


def mvn_sample(mean, precision, rng: RngStream, size=None):
    """N(mean, precision^{-1}) draws via Cholesky of the precision:
    with precision = L L', solving L' z = eps gives cov(z) = precision^{-1}."""
    mean = np.asarray(mean, dtype=np.float64)
    precision = np.asarray(precision, dtype=np.float64)
    try:
        chol = np.linalg.cholesky(precision)
    except np.linalg.LinAlgError as exc:
        raise ValueError("precision matrix is not positive definite") from exc
    d = mean.shape[0]
    if size is None:
        eps = rng.normal(d)
        return mean + np.linalg.solve(chol.T, eps)
    eps = rng.normal((int(size), d))
    return mean + np.linalg.solve(chol.T, eps.T).T


def tg_sample(x, params: TruncGaussParams, rng: RngStream) -> np.ndarray:
    """Positive-orthant truncated Gaussian responses, one row per
    design row, by rejection of N(Bx_i, Lambda^{-1}) proposals.

    A row that rejects 10^6 candidates aborts with an error naming it;
    that corresponds to acceptance probability below about 1e-6.
    """
    x = np.asarray(x, dtype=np.float64)
    n = x.shape[0]
    d = params.d
    means = x @ params.b.T
    try:
        chol = np.linalg.cholesky(params.lam)
    except np.linalg.LinAlgError as exc:
        raise ValueError("precision matrix is not positive definite") from exc

    out = np.empty((n, d))
    todo = np.arange(n)
    tries = 0
    while todo.size:
        tries += 1
        if tries > 1_000_000:
            raise RuntimeError(
                f"tg_sample: row {int(todo[0])} exceeded 1e6 rejections "
                "(acceptance probability below 1e-6)")
        eps = rng.normal((todo.size, d))
        cand = means[todo] + np.linalg.solve(chol.T, eps.T).T
        ok = np.all(cand > 0.0, axis=1)
        out[todo[ok]] = cand[ok]
        todo = todo[~ok]
    return out


def pit_values(dataset: Dataset, beta, nu, rng: RngStream | None = None) -> np.ndarray:
    """Randomized probability integral transform for count data:
    u_i = F(y_i - 1) + v_i * p(y_i) with v_i uniform, which is exactly
    uniform when the model is true. rng=None derandomizes (v_i = 0.5)."""
    y = dataset.y_count.astype(np.int64)
    lam = np.exp(dataset.x @ np.asarray(beta, dtype=np.float64))
    cdf, _ = cmp_cdf_matrix(lam, float(nu))
    rows = np.arange(y.shape[0])
    # counts beyond the table live where the cdf has flattened to 1
    kmax = cdf.shape[1] - 1
    hi = np.where(y > kmax, 1.0, cdf[rows, np.minimum(y, kmax)])
    ym1 = np.clip(y - 1, 0, kmax)
    lo = np.where(y > 0, np.where(y - 1 > kmax, 1.0, cdf[rows, ym1]), 0.0)
    v = 0.5 if rng is None else rng.uniform(y.shape[0])
    return lo + v * (hi - lo)
