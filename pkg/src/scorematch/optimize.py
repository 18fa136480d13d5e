"""Nelder-Mead simplex minimizer.

Deliberately dependency-free so every accept/reject decision is a
plain value comparison: rescaling the objective by a positive
constant leaves the iterate trajectory unchanged, and rerunning with
identical inputs reproduces the result bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class NmConfig:
    alpha: float = 1.0      # reflection
    gamma: float = 2.0      # expansion
    rho_c: float = 0.5      # contraction
    sigma: float = 0.5      # shrink
    f_tol: float = 1e-10
    x_tol: float = 1e-8
    max_iter: int = 5000
    init_step: np.ndarray | None = None   # default 0.1*(1+|theta0_k|)

    def __post_init__(self):
        if not (self.alpha > 0 and self.gamma > 1 and 0 < self.rho_c < 1
                and 0 < self.sigma < 1 and self.max_iter >= 1):
            raise ValueError("invalid Nelder-Mead configuration")


@dataclass
class FitResult:
    theta_hat: np.ndarray
    objective: float
    iterations: int
    converged: bool
    function_evals: int


def minimize(f, theta0, cfg: NmConfig | None = None) -> FitResult:
    """Minimize f from theta0 with the simplex method.

    The initial simplex places one vertex at theta0 and offsets each
    coordinate in turn; if any initial vertex evaluates non-finite the
    offsets are halved, up to 10 times, before giving up.
    """
    cfg = cfg or NmConfig()
    theta0 = np.asarray(theta0, dtype=np.float64).ravel()
    p = theta0.size
    step = cfg.init_step
    if step is None:
        step = 0.1 * (1.0 + np.abs(theta0))
    else:
        step = np.asarray(step, dtype=np.float64).ravel()
        if step.size != p:
            raise ValueError("init_step length must match theta0")

    nfev = 0

    def feval(x):
        nonlocal nfev
        nfev += 1
        v = f(x)
        # NaN would poison comparisons; order it like +inf
        return np.inf if np.isnan(v) else float(v)

    for attempt in range(11):
        scale = 0.5 ** attempt
        sim = np.empty((p + 1, p))
        sim[0] = theta0
        for k in range(p):
            sim[k + 1] = theta0
            sim[k + 1, k] += scale * step[k]
        fvals = np.array([feval(sim[i]) for i in range(p + 1)])
        if np.all(np.isfinite(fvals)):
            break
    else:
        raise RuntimeError("objective non-finite at every jittered start simplex")

    alpha, gamma, rho_c, sigma = cfg.alpha, cfg.gamma, cfg.rho_c, cfg.sigma
    converged = False
    it = 0
    while it < cfg.max_iter:
        order = np.argsort(fvals, kind="stable")
        sim = sim[order]
        fvals = fvals[order]
        spread = fvals[-1] - fvals[0]
        diam = np.max(np.abs(sim[1:] - sim[0]))
        if spread < cfg.f_tol * (1.0 + abs(fvals[0])) and diam < cfg.x_tol:
            converged = True
            break
        it += 1
        centroid = np.mean(sim[:-1], axis=0)
        xr = centroid + alpha * (centroid - sim[-1])
        fr = feval(xr)
        if fr < fvals[0]:
            xe = centroid + gamma * (xr - centroid)
            fe = feval(xe)
            if fe < fr:
                sim[-1], fvals[-1] = xe, fe
            else:
                sim[-1], fvals[-1] = xr, fr
        elif fr < fvals[-2]:
            sim[-1], fvals[-1] = xr, fr
        elif fr < fvals[-1]:
            xc = centroid + rho_c * (xr - centroid)
            fc = feval(xc)
            if fc <= fr:
                sim[-1], fvals[-1] = xc, fc
            else:
                for i in range(1, p + 1):
                    sim[i] = sim[0] + sigma * (sim[i] - sim[0])
                    fvals[i] = feval(sim[i])
        else:
            xc = centroid - rho_c * (centroid - sim[-1])
            fc = feval(xc)
            if fc < fvals[-1]:
                sim[-1], fvals[-1] = xc, fc
            else:
                for i in range(1, p + 1):
                    sim[i] = sim[0] + sigma * (sim[i] - sim[0])
                    fvals[i] = feval(sim[i])

    order = np.argsort(fvals, kind="stable")
    sim = sim[order]
    fvals = fvals[order]
    return FitResult(theta_hat=sim[0].copy(), objective=fvals[0],
                     iterations=it, converged=converged, function_evals=nfev)
