import numpy as np
import pytest
from scipy.special import gammaln

from scorematch.amle import AmleConfig, amle_fit, log_z
from scorematch.core import Dataset
from scorematch.sampling import RngStream, cmp_sample_rows, cmp_table

TRUNC = AmleConfig(z_mode="TRUNCATED")
ASYM = AmleConfig(z_mode="ASYMPTOTIC")
HYBRID = AmleConfig(z_mode="HYBRID")


def _brute_log_z(lam, nu, k):
    s = np.arange(k + 1, dtype=np.float64)
    lt = s * np.log(lam) - nu * gammaln(s + 1.0)
    m = lt.max()
    return m + np.log(np.sum(np.exp(lt - m)))


# ---------------------------------------------------------------- log_z

def test_truncated_poisson_unit():
    assert abs(log_z(1.0, 1.0, TRUNC) - 1.0) < 1e-10


def test_truncated_geometric():
    assert abs(log_z(0.5, 0.0, TRUNC) - np.log(2.0)) < 1e-10


def test_asymptotic_exact_at_unit_dispersion():
    # at nu = 1 the closed form collapses to log Z = lambda, bit for bit
    assert log_z(16.0, 1.0, ASYM) == 16.0
    assert log_z(2.5, 1.0, ASYM) == 2.5


def test_asymptotic_error_visible_at_small_rate():
    exact = _brute_log_z(1.0, 0.25, 400)
    approx = log_z(1.0, 0.25, ASYM)
    assert abs(approx - exact) / abs(exact) > 0.01


def test_hybrid_is_max_of_asymptotic_and_floor():
    for lam, nu in [(0.5, 0.3), (1.0, 0.25), (16.0, 1.0), (3.0, 0.8)]:
        floor = _brute_log_z(lam, nu, HYBRID.floor_terms)
        asym = log_z(lam, nu, ASYM)
        hyb = log_z(lam, nu, HYBRID)
        assert hyb >= asym
        assert abs(hyb - max(asym, floor)) < 1e-12


def test_hybrid_floor_engages_at_small_rate():
    # the regime the floor exists for: asymptotic value collapses below
    # the partial sum
    lam, nu = 0.5, 0.3
    assert log_z(lam, nu, ASYM) < _brute_log_z(lam, nu, HYBRID.floor_terms)
    assert log_z(lam, nu, HYBRID) > log_z(lam, nu, ASYM)


def test_truncated_matches_distribution_table():
    grid = [(lam, nu) for lam in (0.3, 1.0, 2.0, 5.0)
            for nu in (0.2, 0.5, 1.0, 2.0)]
    grid += [(0.5, 0.1), (1.5, 0.1), (2.2, 0.1), (1.2, 0.2564)]
    for lam, nu in grid:
        got = log_z(lam, nu, TRUNC)
        want = cmp_table(lam, nu).log_z
        assert abs(got - want) < 1e-9, (lam, nu)


def test_log_z_vector_input():
    lams = np.array([0.5, 1.0, 2.0])
    out = log_z(lams, 0.7, TRUNC)
    assert out.shape == (3,)
    # the vector path shares one truncation point across rows, so values
    # agree only up to twice the certified tail bound
    for i, lam in enumerate(lams):
        assert abs(out[i] - log_z(float(lam), 0.7, TRUNC)) < 1e-9
    assert isinstance(log_z(1.0, 0.7, TRUNC), float)


def test_log_z_validation():
    with pytest.raises(ValueError, match="positive and finite"):
        log_z(-1.0, 1.0, TRUNC)
    with pytest.raises(ValueError, match="positive and finite"):
        log_z(np.inf, 1.0, TRUNC)
    with pytest.raises(ValueError, match="nonnegative"):
        log_z(1.0, -0.1, TRUNC)
    with pytest.raises(ValueError, match="requires nu > 0"):
        log_z(0.5, 0.0, ASYM)
    with pytest.raises(ValueError, match="requires nu > 0"):
        log_z(0.5, 0.0, HYBRID)
    with pytest.raises(ValueError, match="divergent"):
        log_z(1.5, 0.0, TRUNC)
    with pytest.raises(ValueError, match="overflows"):
        log_z(1000.0, 0.1, ASYM)


def test_config_validation():
    with pytest.raises(ValueError, match="z_mode"):
        AmleConfig(z_mode="EXACT")
    with pytest.raises(ValueError, match="tail"):
        AmleConfig(tail=0.0)
    with pytest.raises(ValueError, match="tail"):
        AmleConfig(tail=1e-3)
    with pytest.raises(ValueError, match="floor_terms"):
        AmleConfig(floor_terms=0)


# ---------------------------------------------------------------- fitting

def _poisson_dataset(n=400, seed=3):
    rng = RngStream(seed, 99)
    x = np.column_stack([np.ones(n), rng.normal(n)])
    beta0 = np.array([0.4, 0.3])
    y = cmp_sample_rows(np.exp(x @ beta0), 1.0, rng)
    return Dataset(x=x, y_count=y)


def _irls_poisson(x, y, iters=60):
    beta = np.zeros(x.shape[1])
    for _ in range(iters):
        mu = np.exp(x @ beta)
        step = np.linalg.solve(x.T @ (mu[:, None] * x), x.T @ (y - mu))
        beta = beta + step
        if np.max(np.abs(step)) < 1e-12:
            break
    return beta


def test_fixed_dispersion_truncated_equals_poisson_glm():
    ds = _poisson_dataset()
    res = amle_fit(ds, TRUNC, fix_nu=1.0)
    want = _irls_poisson(ds.x, ds.y_count)
    assert np.max(np.abs(res.params.beta - want)) < 1e-4
    assert res.params.nu == 1.0
    assert res.se[-1] == 0.0
    assert np.all(res.cov[-1, :] == 0.0) and np.all(res.cov[:, -1] == 0.0)


def test_amle_fit_validation():
    ds = _poisson_dataset(n=50)
    with pytest.raises(ValueError, match="count"):
        amle_fit(Dataset(x=np.ones((4, 1)), y_cont=np.ones((4, 1))))
    with pytest.raises(ValueError, match="fix_nu"):
        amle_fit(ds, fix_nu=0.0)
    bad = np.array([0.0, 0.0, 0.0])
    with pytest.raises(ValueError, match="starting dispersion"):
        amle_fit(ds, TRUNC, theta0=bad)


def test_fit_reports():
    ds = _poisson_dataset(n=300)
    res = amle_fit(ds, TRUNC)
    p1 = ds.x.shape[1] + 1
    assert res.se.shape == (p1,)
    assert res.cov.shape == (p1, p1)
    assert res.loglik == -ds.n * res.fit.objective
    assert res.z_mode_used is None
    assert res.params.nu > 0
    # unit dispersion data, free fit should land near nu = 1
    assert abs(res.params.nu - 1.0) < 0.35


def test_hybrid_flags_report_active_branch():
    ds = _poisson_dataset(n=200)
    res = amle_fit(ds, HYBRID)
    assert res.z_mode_used is not None
    assert res.z_mode_used.shape == (200,)
    assert set(np.unique(res.z_mode_used)) <= {"ASYMPTOTIC", "TRUNCATED"}


def test_hybrid_biased_upward_on_dispersed_counts(cmp_report):
    """The working likelihood's distortion at small dispersion drags the
    intercept up; the exact-series fit on the same replicates does not."""
    assert cmp_report.value("bias", estimator="AMLE",
                            parameter="beta1", n=1000) > 0.15


def test_truncated_pipeline_nearly_unbiased(cmp_trunc_report):
    for row in cmp_trunc_report.rows:
        mc_err = row.sd / np.sqrt(row.replicates)
        assert abs(row.bias) < 3.0 * mc_err, row.parameter
