"""Weak-coupling flow against an independent ODE integration.

The closed-form covariance solution is checked against solve_ivp on
the same time-local equation, the flow against a finite-difference
derivative of the environment energy, and the asymptotic rates against
their golden-rule values (pi/2) J(omega_0).
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicSpline

from qbm import SpectralParams, WeakCouplingRun, coefficient_table
from qbm.errors import ConvergenceError
from qbm.weak_coupling import (
    covariance_trajectory,
    energy_flow,
    energy_trace,
    markov_limit,
    thermal_sigma,
)


def test_covariance_solves_the_coefficient_ode(weak_run):
    """Closed form vs solve_ivp on dsigma/dt = Delta(t) - 2 gamma(t) sigma."""
    k = weak_run.kernels
    delta = CubicSpline(k.t, k.delta)
    gamma = CubicSpline(k.t, k.gamma)
    sol = solve_ivp(
        lambda t, y: delta(t) - 2.0 * gamma(t) * y,
        (0.0, k.t[-1]),
        [weak_run.sigma0],
        t_eval=k.t[::50],
        rtol=1e-10,
        atol=1e-12,
        method="DOP853",
    )
    sigma = covariance_trajectory(weak_run)
    assert np.max(np.abs(sigma[::50] - sol.y[0])) < 1e-7


def test_thermal_sigma_is_coth():
    assert thermal_sigma(0.0) == 0.5
    for temp in (0.3, 1.0, 4.0):
        assert thermal_sigma(temp) == pytest.approx(
            0.5 / np.tanh(0.5 / temp), rel=1e-14
        )


@given(
    cold=st.floats(min_value=0.0, max_value=20.0),
    gap=st.floats(min_value=1e-6, max_value=5.0),
)
@settings(max_examples=25)
def test_thermal_sigma_monotone(cold, gap):
    assert thermal_sigma(cold + gap) > thermal_sigma(cold) - 1e-15
    assert thermal_sigma(cold) >= 0.5


def test_flow_is_derivative_of_environment_energy(weak_run):
    trace = energy_trace(weak_run)
    fd = np.gradient(trace.dq_env, trace.t)
    assert np.max(np.abs(fd[1:-1] - trace.theta[1:-1])) < 1e-7


def test_phi_is_derivative_of_covariance(weak_run):
    """phi = dsigma/dt (system energy rate with omega_0 = 1)."""
    trace = energy_trace(weak_run)
    sigma = covariance_trajectory(weak_run)
    fd = np.gradient(sigma, trace.t)
    assert np.max(np.abs(fd[1:-1] - trace.phi[1:-1])) < 1e-7


def test_system_energy_change_tracks_covariance(weak_run):
    trace = energy_trace(weak_run)
    sigma = covariance_trajectory(weak_run)
    assert np.allclose(trace.de_sys, sigma - sigma[0], atol=1e-12)


@given(sigma0=st.floats(min_value=0.5, max_value=5.0))
@settings(max_examples=25)
def test_trajectory_starts_at_initial_condition(weak_kernels, sigma0):
    run = WeakCouplingRun(weak_kernels, temp_sys=1.0, sigma0=sigma0)
    sigma = covariance_trajectory(run)
    assert sigma[0] == sigma0
    assert sigma.min() >= 0.5 - 1e-9


def test_initial_condition_below_vacuum_rejected(weak_kernels):
    with pytest.raises(ValueError, match="uncertainty"):
        WeakCouplingRun(weak_kernels, temp_sys=1.0, sigma0=0.3)


def test_markov_limit_matches_golden_rule(weak_run):
    p = weak_run.kernels.params
    lim = markov_limit(weak_run)
    gamma_ref = 0.5 * np.pi * p.coupling * np.exp(-1.0 / p.cutoff)
    assert lim.gamma_inf == pytest.approx(gamma_ref, rel=1e-2)
    assert lim.delta_inf == pytest.approx(
        gamma_ref / np.tanh(0.5 / p.temp_env), rel=1e-2
    )
    assert lim.sigma_inf == pytest.approx(lim.delta_inf / (2.0 * lim.gamma_inf))


def test_markov_flow_relaxes_exponentially(weak_run):
    lim = markov_limit(weak_run)
    ref = (weak_run.sigma0 - lim.sigma_inf) * np.exp(-2.0 * lim.gamma_inf * lim.t)
    assert np.allclose(lim.sigma - lim.sigma_inf, ref, atol=1e-12)
    assert np.allclose(lim.theta, 2.0 * lim.gamma_inf * (lim.sigma - lim.sigma_inf),
                       atol=1e-14)


def test_markov_limit_needs_two_periods(weak_params):
    short = coefficient_table(weak_params, t_max=6.0, t_step=0.01)
    with pytest.raises(ConvergenceError):
        markov_limit(WeakCouplingRun(short, temp_sys=1.0))


def test_strong_coupling_input_warns():
    table = coefficient_table(SpectralParams(0.5, 0.25, 1.0), t_max=15.0,
                              t_step=0.01)
    with pytest.warns(UserWarning, match="weak-coupling"):
        WeakCouplingRun(table, temp_sys=1.0)


def test_flow_accepts_precomputed_covariance(weak_run):
    sigma = covariance_trajectory(weak_run)
    assert np.array_equal(energy_flow(weak_run, sigma=sigma),
                          energy_flow(weak_run))
