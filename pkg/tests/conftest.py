"""Shared fixtures.

The three replicated studies below are the expensive part of the
suite (a couple of minutes together), so they are session-scoped and
shared between the per-module tests and the acceptance gate.
"""

import pytest

from scorematch import run_mc

MASTER_SEED = 0


@pytest.fixture(scope="session")
def tg_report():
    # truncated-Gaussian setting, score-matching estimator
    return run_mc("TG", n_list=(1000,), r=200, master_seed=MASTER_SEED)


@pytest.fixture(scope="session")
def cmp_report():
    # count setting: matching estimator plus the hybrid-likelihood baseline
    return run_mc("CMP", n_list=(1000,), r=200, master_seed=MASTER_SEED,
                  amle_z_mode="HYBRID")


@pytest.fixture(scope="session")
def cmp_trunc_report():
    # same pipeline with the exact series likelihood
    return run_mc("CMP", estimators=("AMLE",), n_list=(1000,), r=200,
                  master_seed=MASTER_SEED, amle_z_mode="TRUNCATED")
