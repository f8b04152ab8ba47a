"""Weak-coupling engine for the damped oscillator's energy statistics.

Works entirely at the level of the single nontrivial Gaussian parameter
sigma(t) = <X^2> = <P^2> of the secular (phase-covariant) master
equation with time-dependent coefficients delta(t), gamma(t).  The
covariance solves

    sigma'(t) = delta(t) - 2 gamma(t) sigma(t),

whose closed form

    sigma(t) = e^{-2 Gamma(t)} ( sigma0 + Int_0^t delta(s) e^{2 Gamma(s)} ds )

is evaluated by cumulative quadrature (no stiffness issues at small
coupling); direct ODE stepping is kept in the test suite as an oracle.

The energy flow into the environment per unit time is

    theta(t) = 2 sigma(t) (D2(t)/2 cos t + gamma(t)) + D1(t)/2 sin t - delta(t)

with omega_0 = 1.  Validity is the weak-coupling regime; a warning is
emitted for coupling > 0.1 but nothing is forbidden.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_simpson

from .errors import ConvergenceError, NumericsError
from .kernels import KernelTable
from .traces import EnergyTrace

__all__ = [
    "WeakCouplingRun",
    "thermal_sigma",
    "covariance_trajectory",
    "energy_flow",
    "system_energy",
    "environment_energy",
    "markov_limit",
    "MarkovLimit",
    "energy_trace",
]

WEAK_COUPLING_BOUNDARY = 0.1


def thermal_sigma(temp):
    """<X^2> = <P^2> of a thermal oscillator state at omega_0 = 1.

    Equals (1 + 2 n(T))/2 = coth(1/2T)/2; 1/2 at T = 0 (vacuum).
    """
    if temp < 0:
        raise ValueError("temperature must be >= 0")
    if temp == 0:
        return 0.5
    return 0.5 / np.tanh(0.5 / temp)


@dataclass(frozen=True)
class WeakCouplingRun:
    """A weak-coupling trajectory setup: kernel table + initial state.

    sigma0 defaults to the thermal value for temp_sys; passing it
    explicitly allows non-thermal (but still phase-symmetric) inputs.
    """

    kernels: KernelTable
    temp_sys: float
    sigma0: float = None

    def __post_init__(self):
        if self.temp_sys < 0:
            raise ValueError("temp_sys must be >= 0")
        if self.sigma0 is None:
            object.__setattr__(self, "sigma0", thermal_sigma(self.temp_sys))
        if self.sigma0 < 0.5 - 1e-12:
            raise ValueError(f"sigma0={self.sigma0} violates the uncertainty bound 1/2")
        if self.kernels.params.coupling > WEAK_COUPLING_BOUNDARY:
            warnings.warn(
                f"coupling={self.kernels.params.coupling} is outside the "
                "weak-coupling regime (> 0.1); results are uncontrolled",
                stacklevel=2,
            )


def covariance_trajectory(run):
    """sigma(t) on the kernel grid via the closed-form solution."""
    k = run.kernels
    if k.big_gamma.max() > 300.0 or k.big_gamma.min() < -300.0:
        raise NumericsError(
            "integrated damping too large for the exponential closed form; "
            "shorten the horizon or reduce the coupling"
        )
    grow = np.exp(2.0 * k.big_gamma)
    integral = cumulative_simpson(k.delta * grow, dx=k.step, initial=0.0)
    return (run.sigma0 + integral) / grow


def energy_flow(run, sigma=None):
    """theta(t): environment energy gain per unit time, on the grid."""
    k = run.kernels
    if sigma is None:
        sigma = covariance_trajectory(run)
    return (
        2.0 * sigma * (0.5 * k.d2 * np.cos(k.t) + k.gamma)
        + 0.5 * k.d1 * np.sin(k.t)
        - k.delta
    )


def system_energy(run, sigma=None):
    """(<Delta E_S>(t), phi(t)) with phi the instantaneous rate."""
    k = run.kernels
    if sigma is None:
        sigma = covariance_trajectory(run)
    de_sys = sigma - run.sigma0
    phi = k.delta - 2.0 * k.gamma * sigma
    return de_sys, phi


def environment_energy(run, theta=None):
    """<Delta q>(t) = Int_0^t theta."""
    k = run.kernels
    if theta is None:
        theta = energy_flow(run)
    return cumulative_simpson(theta, dx=k.step, initial=0.0)


@dataclass(frozen=True)
class MarkovLimit:
    """Asymptotic coefficients and the corresponding semigroup flow."""

    delta_inf: float
    gamma_inf: float
    sigma_inf: float
    t: np.ndarray
    sigma: np.ndarray
    theta: np.ndarray


def markov_limit(run, rel_tol=0.01):
    """Stabilized (delta_inf, gamma_inf) and the constant-coefficient flow.

    Asymptotes are averages of the tabulated coefficients over the last
    full 2*pi window (the coefficients approach their limits with an
    oscillating O(1/t^2) tail at the system frequency, so averaging
    over whole periods cancels the oscillation instead of aliasing it).
    The last two such windows must agree to rel_tol or the table is
    judged too short and a ConvergenceError is raised.
    """
    k = run.kernels
    n_per = int(round(2.0 * np.pi / k.step))
    if k.t.size < 2 * n_per + 1:
        raise ConvergenceError(
            "table shorter than two oscillation periods; cannot estimate asymptotes"
        )
    est = {}
    for name in ("delta", "gamma"):
        col = getattr(k, name)
        w2 = col[-n_per:].mean()
        w1 = col[-2 * n_per:-n_per].mean()
        scale = max(abs(w2), 1e-300)
        if abs(w2 - w1) > rel_tol * scale and abs(w2 - w1) > 1e-14:
            raise ConvergenceError(
                f"{name}(t) not stabilized over the table horizon: "
                f"window means {w1:.6e} vs {w2:.6e}"
            )
        est[name] = w2
    delta_inf, gamma_inf = est["delta"], est["gamma"]
    if gamma_inf <= 0:
        # free limit: nothing decays, semigroup flow is identically zero
        sigma_inf = run.sigma0
        sigma = np.full_like(k.t, run.sigma0)
        theta = np.zeros_like(k.t)
    else:
        sigma_inf = delta_inf / (2.0 * gamma_inf)
        sigma = sigma_inf + (run.sigma0 - sigma_inf) * np.exp(-2.0 * gamma_inf * k.t)
        theta = 2.0 * gamma_inf * (sigma - sigma_inf)
    return MarkovLimit(
        delta_inf=float(delta_inf),
        gamma_inf=float(gamma_inf),
        sigma_inf=float(sigma_inf),
        t=k.t,
        sigma=sigma,
        theta=theta,
    )


def energy_trace(run):
    """Full EnergyTrace for this engine (dh_int is not defined here)."""
    k = run.kernels
    sigma = covariance_trajectory(run)
    theta = energy_flow(run, sigma=sigma)
    de_sys, phi = system_energy(run, sigma=sigma)
    dq_env = environment_energy(run, theta=theta)
    p = k.params
    return EnergyTrace(
        t=k.t,
        theta=theta,
        de_sys=de_sys,
        dq_env=dq_env,
        phi=phi,
        engine="analytic",
        params={
            "coupling": p.coupling,
            "cutoff": p.cutoff,
            "temp_env": p.temp_env,
            "temp_sys": run.temp_sys,
            "sigma0": run.sigma0,
            "t_max": float(k.t[-1]),
            "t_step": k.step,
        },
    )
