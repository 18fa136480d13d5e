"""Numba-accelerated kernels, mirroring numpy_impl row for row.

All loops are per-row independent (prange partitions rows, no shared
accumulators), so results do not depend on thread count.
"""

import math

import numpy as np
from numba import njit, prange

_LOG2PI = 0.9189385332046727


@njit(cache=True, parallel=True)
def tg_rho_rows(y, xb, lam):
    n, d = y.shape
    rho = np.zeros(n)
    for i in prange(n):
        acc = 0.0
        for j in range(d):
            v_j = 0.0
            for k in range(d):
                v_j += lam[j, k] * (y[i, k] - xb[i, k])
            yj = y[i, j]
            acc += -4.0 * v_j * yj - 2.0 * yj * yj * lam[j, j] + yj * yj * v_j * v_j
        rho[i] = acc
    return rho


@njit(cache=True, parallel=True)
def tg_grad_rows(y, x, xb, lam):
    n, d = y.shape
    p = x.shape[1]
    nvech = d * (d + 1) // 2
    g = np.zeros((n, d * p + nvech))
    for i in prange(n):
        s = np.empty(d)
        v = np.empty(d)
        w = np.empty(d)
        for j in range(d):
            s[j] = y[i, j] - xb[i, j]
        for j in range(d):
            vj = 0.0
            for k in range(d):
                vj += lam[j, k] * s[k]
            v[j] = vj
            w[j] = y[i, j] * y[i, j] * vj
        for j in range(d):
            aj = 0.0
            for k in range(d):
                aj += lam[j, k] * (4.0 * y[i, k] - 2.0 * w[k])
            for c in range(p):
                g[i, c * d + j] = aj * x[i, c]
        idx = d * p
        for c in range(d):
            for r_ in range(c, d):
                if r_ == c:
                    g[i, idx] = -4.0 * s[c] * y[i, c] - 2.0 * y[i, c] * y[i, c] \
                        + 2.0 * s[c] * w[c]
                else:
                    g[i, idx] = -4.0 * (s[r_] * y[i, c] + s[c] * y[i, r_]) \
                        + 2.0 * (s[r_] * w[c] + s[c] * w[r_])
                idx += 1
    return g


@njit(cache=True, parallel=True)
def gsm_rho_rows(y, eta, nu):
    n = y.shape[0]
    rho = np.empty(n)
    for i in prange(n):
        lam = math.exp(eta[i])
        tf = 1.0 / (1.0 + lam / (y[i] + 1.0) ** nu)
        if y[i] > 0:
            tb = 1.0 / (1.0 + lam / y[i] ** nu)
        else:
            tb = 0.0
        rho[i] = tf * tf + tb * tb - 2.0 * tf
    return rho


@njit(cache=True, parallel=True)
def gsm_grad_rows(y, x, eta, nu):
    n = y.shape[0]
    p = x.shape[1]
    g = np.empty((n, p + 1))
    for i in prange(n):
        lam = math.exp(eta[i])
        tf = 1.0 / (1.0 + lam / (y[i] + 1.0) ** nu)
        if y[i] > 0:
            tb = 1.0 / (1.0 + lam / y[i] ** nu)
        else:
            tb = 0.0
        deta = 2.0 * tf * (1.0 - tf) ** 2 - 2.0 * tb * tb * (1.0 - tb)
        dnu = -2.0 * tf * (1.0 - tf) ** 2 * math.log(y[i] + 1.0)
        if y[i] > 0:
            dnu += 2.0 * tb * tb * (1.0 - tb) * math.log(y[i])
        for c in range(p):
            g[i, c] = deta * x[i, c]
        g[i, p] = dnu
    return g


@njit(cache=True, parallel=True)
def cmp_logz_trunc_rows(eta, nu, kmax, lgam):
    n = eta.shape[0]
    out = np.empty(n)
    for i in prange(n):
        m = 0.0
        for s_ in range(kmax + 1):
            lt = s_ * eta[i] - nu * lgam[s_]
            if lt > m:
                m = lt
        acc = 0.0
        for s_ in range(kmax + 1):
            acc += math.exp(s_ * eta[i] - nu * lgam[s_] - m)
        out[i] = m + math.log(acc)
    return out


@njit(cache=True, parallel=True)
def cmp_logz_asym_rows(eta, nu):
    n = eta.shape[0]
    out = np.empty(n)
    for i in prange(n):
        lam = math.exp(eta[i])
        out[i] = (nu * lam ** (1.0 / nu)
                  - (nu - 1.0) / (2.0 * nu) * eta[i]
                  - (nu - 1.0) * _LOG2PI
                  - 0.5 * math.log(nu))
    return out


@njit(cache=True, parallel=True)
def cmp_logz_asym_floored_rows(eta, nu, lgam, nfloor):
    n = eta.shape[0]
    out = np.empty(n)
    for i in prange(n):
        lam = math.exp(eta[i])
        raw = (nu * lam ** (1.0 / nu)
               - (nu - 1.0) / (2.0 * nu) * eta[i]
               - (nu - 1.0) * _LOG2PI
               - 0.5 * math.log(nu))
        m = 0.0
        for s_ in range(nfloor + 1):
            lt = s_ * eta[i] - nu * lgam[s_]
            if lt > m:
                m = lt
        acc = 0.0
        for s_ in range(nfloor + 1):
            acc += math.exp(s_ * eta[i] - nu * lgam[s_] - m)
        floor = m + math.log(acc)
        out[i] = raw if raw > floor else floor
    return out
