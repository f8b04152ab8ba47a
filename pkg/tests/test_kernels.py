"""Kernel closed forms against independent quadrature and mpmath.

The closed forms (trigamma for the noise kernel, rational for the
dissipation kernel) are the foundation of everything downstream, so
they get the most paranoid treatment: an external special-function
oracle, oscillatory-weight quadrature of the defining integrals, and
the classical high-temperature limit.
"""

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from qbm import SpectralParams
from qbm.kernels import (
    KernelTable,
    correlation_function,
    discretize_bath,
    dissipation_kernel,
    noise_kernel,
    spectral_density,
    trigamma,
)

PARAM_GRID = [
    SpectralParams(lam, om, te)
    for lam in (0.01, 0.1)
    for om in (0.25, 1.0)
    for te in (0.0, 0.25, 1.0)
]


def test_trigamma_matches_mpmath():
    pts = np.array(
        [0.3 + 0.0j, 1.0 + 0.5j, 2.5 - 4.0j, 8.0 + 25.0j, 40.0 + 3.0j, 0.7 - 90.0j]
    )
    ref = np.array([complex(mpmath.polygamma(1, complex(z))) for z in pts])
    assert np.max(np.abs(trigamma(pts) - ref)) < 1e-13


@pytest.mark.parametrize("params", PARAM_GRID)
def test_closed_forms_match_quadrature(params):
    """D1, D2 closed forms vs direct integration of their definitions."""
    t = np.array([0.0, 0.3, 1.7, 5.0, 14.2, 33.0, 50.0])
    closed = correlation_function(t, params, method="closed")
    direct = correlation_function(t, params, method="quadrature")
    assert np.max(np.abs(closed - direct)) < 1e-10


def test_correlation_splits_into_kernels(weak_params):
    t = np.linspace(0.0, 10.0, 37)
    phi = correlation_function(t, weak_params)
    assert np.allclose(2.0 * phi.real, noise_kernel(t, weak_params), atol=1e-15)
    assert np.allclose(-2.0 * phi.imag, dissipation_kernel(t, weak_params), atol=1e-15)


def test_noise_kernel_zero_temperature_origin():
    # D1(0) = 2 Int J = 2 lam cutoff^2 at T = 0
    p = SpectralParams(0.07, 0.6, 0.0)
    assert noise_kernel(0.0, p) == pytest.approx(2.0 * 0.07 * 0.6**2, rel=1e-12)


def test_noise_kernel_classical_limit():
    """T >> cutoff flattens coth to 2T/w, leaving a pure Lorentzian."""
    p = SpectralParams(0.02, 0.5, 60.0)
    t = np.linspace(0.0, 20.0, 201)
    classical = 4.0 * p.temp_env * p.coupling * p.cutoff / (1.0 + (p.cutoff * t) ** 2)
    assert np.max(np.abs(noise_kernel(t, p) - classical)) < 1e-4 * classical.max()


def test_dissipation_kernel_ignores_temperature():
    t = np.linspace(-10.0, 10.0, 41)
    cold = dissipation_kernel(t, SpectralParams(0.05, 0.8, 0.0))
    hot = dissipation_kernel(t, SpectralParams(0.05, 0.8, 7.0))
    assert np.array_equal(cold, hot)


@given(t=st.floats(min_value=-30.0, max_value=30.0, allow_nan=False))
@settings(max_examples=25)
def test_kernel_parity(t):
    p = SpectralParams(0.03, 0.8, 0.7)
    assert noise_kernel(t, p) == pytest.approx(noise_kernel(-t, p), rel=1e-12)
    assert dissipation_kernel(t, p) == pytest.approx(
        -dissipation_kernel(-t, p), rel=1e-12, abs=1e-300
    )


@given(
    coupling=st.floats(min_value=1e-4, max_value=2.0),
    scale=st.floats(min_value=0.1, max_value=10.0),
    t=st.floats(min_value=0.0, max_value=40.0),
)
@settings(max_examples=25)
def test_kernels_scale_linearly_with_coupling(coupling, scale, t):
    base = SpectralParams(coupling, 0.5, 1.3)
    scaled = SpectralParams(coupling * scale, 0.5, 1.3)
    assert noise_kernel(t, scaled) == pytest.approx(
        scale * noise_kernel(t, base), rel=1e-12
    )
    assert dissipation_kernel(t, scaled) == pytest.approx(
        scale * dissipation_kernel(t, base), rel=1e-12, abs=1e-300
    )


@pytest.mark.parametrize("t_probe", [2.0, 7.5, 20.0])
def test_coefficient_columns_match_quadrature(weak_kernels, weak_params, t_probe):
    """delta/gamma Simpson columns vs adaptive quadrature of the integrands."""
    idx = int(round(t_probe / weak_kernels.step))
    ref_delta, _ = quad(
        lambda s: 0.5 * noise_kernel(s, weak_params) * np.cos(s),
        0.0, t_probe, limit=400, epsabs=1e-13,
    )
    ref_gamma, _ = quad(
        lambda s: 0.5 * dissipation_kernel(s, weak_params) * np.sin(s),
        0.0, t_probe, limit=400, epsabs=1e-13,
    )
    assert weak_kernels.delta[idx] == pytest.approx(ref_delta, abs=1e-9)
    assert weak_kernels.gamma[idx] == pytest.approx(ref_gamma, abs=1e-9)


def test_big_gamma_is_cumulative_damping(weak_kernels):
    deriv = np.gradient(weak_kernels.big_gamma, weak_kernels.t)
    # centered differences are O(h^2); compare away from the endpoints
    assert np.max(np.abs(deriv[1:-1] - weak_kernels.gamma[1:-1])) < 1e-8


def test_table_rejects_nonuniform_grid(weak_params):
    t = np.array([0.0, 0.1, 0.3])
    z = np.zeros(3)
    with pytest.raises(ValueError, match="uniform"):
        KernelTable(t=t, d1=z, d2=z, delta=z, gamma=z, big_gamma=z,
                    params=weak_params)


def test_spectral_density_rejects_negative_frequency(weak_params):
    with pytest.raises(ValueError):
        spectral_density(-0.5, weak_params)


def test_spectral_params_validation():
    with pytest.raises(ValueError):
        SpectralParams(-0.1, 0.25, 1.0)
    with pytest.raises(ValueError):
        SpectralParams(0.1, 0.0, 1.0)
    with pytest.raises(ValueError):
        SpectralParams(0.1, 0.25, -1.0)


def test_discretize_bath_reproduces_density_integral(weak_params):
    """Midpoint couplings resolve Int J = lam cutoff^2 at second order."""
    exact = weak_params.coupling * weak_params.cutoff**2

    def err(n):
        modes = discretize_bath(weak_params, n_modes=n)
        total = float(np.sum(modes.couplings**2 / (2.0 * modes.freqs)))
        return abs(total - exact)

    e150, e300 = err(150), err(300)
    assert e300 < 1e-3 * exact
    assert e150 / e300 == pytest.approx(4.0, rel=0.2)
    modes = discretize_bath(weak_params, n_modes=150)
    assert np.all(np.diff(modes.freqs) > 0)
    assert modes.spacing == pytest.approx(modes.freqs[1] - modes.freqs[0])
