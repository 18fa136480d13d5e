"""Monte Carlo study driver, PIT diagnostics, and train/test scoring.

Two built-in simulation settings:

* TG: bivariate truncated-Gaussian regression with intercept plus one
  standard-normal covariate (drawn once per (n, master_seed) and then
  frozen across replicates).
* CMP: count regression on a bundled synthetic six-column design
  (intercept, two binaries, a small count, two continuous skews). The
  design is generated from a fixed internal seed so that report rows
  are comparable across master seeds; all replicate randomness comes
  from the master seed.

Replicate r always draws from the stream (master_seed, base + r), so
reports are bit-identical across runs and across thread counts, and
every estimator within a setting sees the same simulated datasets.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from .amle import AmleConfig, amle_fit
from .core import (CmpParams, Dataset, TruncGaussParams, cmp_param_names,
                   pack_tg, tg_param_names)
from .estimators import fit_gsm, fit_sm
from .inference import CiTable, bootstrap_percentile, sandwich
from .sampling import (STREAM_DESIGN, STREAM_REP_CMP, STREAM_REP_TG,
                       STREAM_SPLIT, RngStream, cmp_cdf_matrix, cmp_mean_rows,
                       cmp_sample_from_cdf, pit_values, tg_sample)

TG_B0 = np.array([[1.0, -0.5], [0.4, 0.2]])
TG_LAM0 = np.array([[20.0, 10.0], [10.0, 30.0]])
CMP_BETA0 = np.array([-0.3141, -0.0893, 0.0445, -0.0705, 0.0693, 0.0830])
CMP_NU0 = 0.2564
CMP_COVARIATE_NAMES = ["gender", "married", "kid5", "phd", "mentor"]

_Z95 = norm.ppf(0.975)


@dataclass
class McRow:
    setting: str
    estimator: str
    n: int
    parameter: str
    bias: float
    sd: float
    asd: float
    rmse: float
    coverage: float
    replicates: int
    failed: int


@dataclass
class McReport:
    rows: list

    def to_dicts(self):
        return [vars(r).copy() for r in self.rows]

    def subset(self, **match):
        keep = [r for r in self.rows
                if all(getattr(r, k) == v for k, v in match.items())]
        return McReport(rows=keep)

    def value(self, field: str, **match):
        sub = self.subset(**match).rows
        if len(sub) != 1:
            raise KeyError(f"{len(sub)} rows match {match}")
        return getattr(sub[0], field)


def tg_design(n: int, master_seed: int) -> np.ndarray:
    stream = RngStream(master_seed, STREAM_DESIGN)
    return np.column_stack([np.ones(n), stream.normal(n)])


def cmp_design(n: int) -> np.ndarray:
    """Bundled synthetic design: z-scored covariates behind an intercept."""
    rng = np.random.default_rng(12345)
    gender = (rng.random(n) < 0.46).astype(float)
    married = (rng.random(n) < 0.66).astype(float)
    kid5 = rng.binomial(3, 0.16, n).astype(float)
    phd = np.clip(rng.normal(3.1, 0.95, n), 0.75, 4.8)
    mentor = np.round(rng.gamma(1.0, 8.8, n))
    cols = [gender, married, kid5, phd, mentor]
    out = [np.ones(n)]
    for c in cols:
        s = c.std()
        if s == 0:
            raise ValueError("degenerate design draw; increase n")
        out.append((c - c.mean()) / s)
    return np.column_stack(out)


def tg_truth() -> TruncGaussParams:
    return TruncGaussParams(b=TG_B0.copy(), lam=TG_LAM0.copy())


def cmp_truth() -> CmpParams:
    return CmpParams(beta=CMP_BETA0.copy(), nu=CMP_NU0)


def run_replicates(setting, estimator, n, r, master_seed, simulate_fn, fit_fn,
                   theta0, names, rep_base) -> list:
    """Core replicate loop shared by run_mc and tests.

    fit_fn(dataset) -> (theta_hat, asd); exceptions and non-finite
    results count as failures, and more than 5% of them aborts.
    """
    theta0 = np.asarray(theta0, dtype=np.float64)
    thetas = []
    asds = []
    failed = 0
    for rep in range(1, r + 1):
        stream = RngStream(master_seed, rep_base + rep)
        try:
            ds = simulate_fn(stream)
            th, asd = fit_fn(ds)
            th = np.asarray(th, dtype=np.float64)
            asd = np.asarray(asd, dtype=np.float64)
            if not (np.all(np.isfinite(th)) and np.all(np.isfinite(asd))):
                raise RuntimeError("non-finite fit or standard error")
            thetas.append(th)
            asds.append(asd)
        except Exception:
            failed += 1
    if failed > 0.05 * r:
        raise RuntimeError(
            f"{failed} of {r} replicates failed for {setting}/{estimator} at n={n}")
    thetas = np.vstack(thetas)
    asds = np.vstack(asds)
    r_ok = thetas.shape[0]

    bias = thetas.mean(axis=0) - theta0
    # displayed-style spread: 1/R inside the root, not 1/(R-1)
    sd = np.sqrt(np.mean((thetas - thetas.mean(axis=0)) ** 2, axis=0))
    rmse = np.sqrt(bias * bias + sd * sd)
    covered = np.abs(thetas - theta0) <= _Z95 * asds
    coverage = covered.mean(axis=0)
    asd_col = asds.mean(axis=0)

    return [McRow(setting=setting, estimator=estimator, n=int(n),
                  parameter=names[k], bias=float(bias[k]), sd=float(sd[k]),
                  asd=float(asd_col[k]), rmse=float(rmse[k]),
                  coverage=float(coverage[k]), replicates=r_ok,
                  failed=failed)
            for k in range(theta0.size)]


def _tg_fit_fn(ds: Dataset):
    res = fit_sm(ds)
    cov = sandwich(res.fit.theta_hat, ds, "sm")
    return res.fit.theta_hat, cov.asd


def _gsm_fit_fn(ds: Dataset):
    res = fit_gsm(ds)
    cov = sandwich(res.fit.theta_hat, ds, "gsm")
    return res.fit.theta_hat, cov.asd


def run_mc(setting: str, estimators=None, n_list=(1000,), r: int = 200,
           master_seed: int = 0, amle_z_mode: str = "HYBRID") -> McReport:
    """Replicated simulation study for one setting.

    setting 'TG' admits estimator 'SM'; setting 'CMP' admits 'GSM' and
    'AMLE' (the latter under amle_z_mode). Within a setting every
    estimator is fit to the same simulated datasets.
    """
    if r < 2:
        raise ValueError("need at least 2 replicates")
    rows = []
    if setting == "TG":
        estimators = tuple(estimators or ("SM",))
        if any(e != "SM" for e in estimators):
            raise ValueError("setting TG supports only the SM estimator")
        params0 = tg_truth()
        theta0 = pack_tg(TG_B0, TG_LAM0)
        names = tg_param_names(2, 2)
        for n in n_list:
            x = tg_design(n, master_seed)
            simulate_fn = lambda s, x=x: Dataset(x=x, y_cont=tg_sample(x, params0, s))
            rows += run_replicates("TG", "SM", n, r, master_seed, simulate_fn,
                                   _tg_fit_fn, theta0, names, STREAM_REP_TG)
    elif setting == "CMP":
        estimators = tuple(estimators or ("GSM", "AMLE"))
        if any(e not in ("GSM", "AMLE") for e in estimators):
            raise ValueError("setting CMP supports the GSM and AMLE estimators")
        theta0 = np.concatenate([CMP_BETA0, [CMP_NU0]])
        names = cmp_param_names(CMP_BETA0.size)
        acfg = AmleConfig(z_mode=amle_z_mode)

        def _amle_fit_fn(ds, acfg=acfg):
            res = amle_fit(ds, acfg)
            return res.fit.theta_hat, res.se

        for n in n_list:
            x = cmp_design(n)
            cdf0, _ = cmp_cdf_matrix(np.exp(x @ CMP_BETA0), CMP_NU0)
            simulate_fn = lambda s, x=x, cdf0=cdf0: Dataset(
                x=x, y_count=cmp_sample_from_cdf(cdf0, s))
            for est in estimators:
                fit_fn = _gsm_fit_fn if est == "GSM" else _amle_fit_fn
                rows += run_replicates("CMP", est, n, r, master_seed,
                                       simulate_fn, fit_fn, theta0, names,
                                       STREAM_REP_CMP)
    else:
        raise ValueError("setting must be 'TG' or 'CMP'")
    return McReport(rows=rows)


def pit_pairs(dataset: Dataset, params: CmpParams, rng: RngStream | None = None):
    """Sorted PIT values paired with uniform plotting quantiles
    (i - 1/2)/n; rng=None derandomizes the within-cell placement."""
    u = np.sort(pit_values(dataset, params.beta, params.nu, rng))
    n = u.shape[0]
    q = (np.arange(1, n + 1) - 0.5) / n
    return u, q


def train_test_mse(dataset: Dataset, split_seed: int, train_frac: float = 0.7,
                   estimator: str = "gsm", amle_cfg: AmleConfig | None = None,
                   fitter=None) -> float:
    """Mean squared error of fitted-model mean predictions on a held-out
    split. The predicted mean is computed exactly from the tail-bounded
    distribution table rather than by simulation.

    fitter, when given, maps a training Dataset to a predict(x) callable
    and overrides the estimator choice.
    """
    n = dataset.n
    n_train = int(round(train_frac * n))
    if not 1 <= n_train <= n - 1:
        raise ValueError("train fraction leaves an empty split")
    perm = RngStream(split_seed, STREAM_SPLIT).generator.permutation(n)
    tr = np.sort(perm[:n_train])
    te = np.sort(perm[n_train:])
    dtr = Dataset(x=dataset.x[tr], y_count=dataset.y_count[tr])
    if fitter is not None:
        predict = fitter(dtr)
    else:
        if estimator == "gsm":
            params = fit_gsm(dtr).params
        elif estimator == "amle":
            params = amle_fit(dtr, amle_cfg or AmleConfig()).params
        else:
            raise ValueError("estimator must be 'gsm' or 'amle'")
        predict = lambda xm: cmp_mean_rows(np.exp(xm @ params.beta), params.nu)
    pred = predict(dataset.x[te])
    resid = pred - dataset.y_count[te]
    return float(np.mean(resid * resid))


def bootstrap_ci(dataset: Dataset, model: str, estimator: str, b: int = 1000,
                 level: float = 0.95, seed: int = 0,
                 amle_cfg: AmleConfig | None = None) -> CiTable:
    """Fit once, then parametric percentile bootstrap on the fixed design."""
    x = dataset.x
    if model == "tg" and estimator == "sm":
        first = fit_sm(dataset)
        if not first.lam_definite:
            raise ValueError("fitted precision is not positive definite; "
                             "cannot simulate from the fit")
        names = tg_param_names(first.params.d, dataset.p_cov)
        simulate_fn = lambda rng: Dataset(x=x, y_cont=tg_sample(x, first.params, rng))
        refit_fn = lambda ds: fit_sm(ds).fit.theta_hat
        theta_hat = first.fit.theta_hat
    elif model == "cmp" and estimator in ("gsm", "amle"):
        if estimator == "gsm":
            params = fit_gsm(dataset).params
            refit_fn = lambda ds: fit_gsm(ds).fit.theta_hat
        else:
            acfg = amle_cfg or AmleConfig()
            params = amle_fit(dataset, acfg).params
            refit_fn = lambda ds, acfg=acfg: amle_fit(ds, acfg).fit.theta_hat
        names = cmp_param_names(dataset.p_cov)
        cdf, _ = cmp_cdf_matrix(np.exp(x @ params.beta), params.nu)
        simulate_fn = lambda rng: Dataset(x=x, y_count=cmp_sample_from_cdf(cdf, rng))
        theta_hat = params.to_vector()
    else:
        raise ValueError(f"unsupported model/estimator pair: {model}/{estimator}")
    return bootstrap_percentile(theta_hat, simulate_fn, refit_fn, b=b,
                                level=level, seed=seed, names=names)


def simulate_dataset(setting: str, n: int, master_seed: int):
    """One dataset at the built-in truth; returns (dataset,
    covariate_names, response_names) for serialization. Responses use
    the replicate-1 stream of the Monte Carlo layout."""
    if setting == "TG":
        x = tg_design(n, master_seed)
        y = tg_sample(x, tg_truth(), RngStream(master_seed, STREAM_REP_TG + 1))
        return Dataset(x=x, y_cont=y), ["x2"], ["y1", "y2"]
    if setting == "CMP":
        x = cmp_design(n)
        cdf0, _ = cmp_cdf_matrix(np.exp(x @ CMP_BETA0), CMP_NU0)
        y = cmp_sample_from_cdf(cdf0, RngStream(master_seed, STREAM_REP_CMP + 1))
        return Dataset(x=x, y_count=y), list(CMP_COVARIATE_NAMES), ["y"]
    raise ValueError("setting must be 'TG' or 'CMP'")
