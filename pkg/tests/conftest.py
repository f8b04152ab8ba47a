"""Shared fixtures.

The weak-coupling flagship point (coupling 0.01, cutoff 0.25, bath
temperature 1) feeds almost every module, so its kernel table and run
are built once per session.
"""

import pytest

from qbm import SpectralParams, WeakCouplingRun, coefficient_table


@pytest.fixture(scope="session")
def weak_params():
    return SpectralParams(coupling=0.01, cutoff=0.25, temp_env=1.0)


@pytest.fixture(scope="session")
def weak_kernels(weak_params):
    return coefficient_table(weak_params, t_max=50.0, t_step=0.01)


@pytest.fixture(scope="session")
def weak_run(weak_kernels):
    return WeakCouplingRun(weak_kernels, temp_sys=1.0)
