"""Interferometric-power witness: fast Gaussian path vs Fock oracle.

The Gaussian-QFI fast path and the number-basis oracle share no code
beyond the state constructors, so their agreement on random states is
the strongest correctness statement in the suite.  On top of that the
measure has exact anchors: zero on product states, invariance under
local rotations, and a closed form for pure squeezed thermal probes.
"""

import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qbm import SpectralParams, coefficient_table
from qbm.fock import (
    FockWorkspace,
    fock_cutoff,
    symplectic_eigenvalues,
    symplectic_form,
    williamson,
)
from qbm.witness import (
    GaussianChannel,
    TwoModeState,
    channel_family,
    channel_lift,
    evolve_joint,
    gip,
    mts_state,
    nonmarkovianity,
    positive_variation,
    semigroup_family,
    sts_state,
)
from qbm.weak_coupling import WeakCouplingRun, covariance_trajectory


def random_state(rng, occ_max=1.5):
    """Random valid two-mode covariance with bounded mode occupancy."""
    a = 0.4 * rng.standard_normal((4, 4))
    g = a @ a.T
    cm = g + 0.5 * np.eye(4)
    while symplectic_eigenvalues(cm).max() > occ_max + 0.5:
        g *= 0.5
        cm = g + 0.5 * np.eye(4)
    return TwoModeState(cm)


def _local_rotation(alpha, beta):
    def r(a):
        return np.array([[np.cos(a), np.sin(a)], [-np.sin(a), np.cos(a)]])

    out = np.zeros((4, 4))
    out[:2, :2] = r(alpha)
    out[2:, 2:] = r(beta)
    return out


# ---------------------------------------------------------------- fock


def test_williamson_reconstructs_random_states():
    rng = np.random.default_rng(11)
    omega = symplectic_form(2)
    for _ in range(6):
        state = random_state(rng)
        smat, nus = williamson(state.cm)
        assert np.max(np.abs(smat @ omega @ smat.T - omega)) < 1e-9
        recon = smat @ np.diag(np.repeat(nus, 2)) @ smat.T
        assert np.max(np.abs(recon - state.cm)) < 1e-10
        assert np.all(nus >= 0.5 - 1e-12)


def test_symplectic_spectra_of_probe_families():
    k = 1.0
    nu = k - 0.5
    mts = symplectic_eigenvalues(mts_state(nu, 0.3).cm)
    assert np.sort(mts) == pytest.approx([k, k * np.exp(4 * 0.3)], rel=1e-12)
    sts = symplectic_eigenvalues(sts_state(nu, 0.3).cm)
    assert sts == pytest.approx([k, k], rel=1e-12)


@given(nu=st.floats(min_value=0.5, max_value=3.0))
@settings(max_examples=25)
def test_fock_cutoff_tail_is_below_tolerance(nu):
    """A Williamson eigenvalue nu means occupation nu - 1/2, i.e.
    geometric weights with ratio (nu - 1/2)/(nu + 1/2)."""
    n_max = fock_cutoff(nu)
    q = (nu - 0.5) / (nu + 0.5)
    assert q ** (n_max + 1) < 1e-10


def test_workspace_rejects_hopeless_cutoff():
    from qbm.errors import NumericsError

    hot = TwoModeState(np.diag([40.0, 40.0, 40.0, 40.0]))
    with pytest.raises(NumericsError, match="cutoff"):
        FockWorkspace(hot.cm, n_max=3)


# ----------------------------------------------------------- the measure


def test_gip_vanishes_on_product_states():
    assert gip(mts_state(0.7, 0.0)) == 0.0
    assert gip(TwoModeState(np.diag([0.9, 0.9, 1.7, 1.7]))) == 0.0


def test_gip_invariant_under_local_rotations():
    rng = np.random.default_rng(5)
    state = sts_state(0.4, 0.5)
    base = gip(state)
    for _ in range(3):
        rot = _local_rotation(rng.uniform(0, 2 * np.pi),
                              rng.uniform(0, 2 * np.pi))
        rotated = TwoModeState(rot @ state.cm @ rot.T)
        assert abs(gip(rotated) - base) < 1e-9


def test_pure_squeezed_probe_closed_form():
    """For nu = 0 the measure is sinh^2(2 r)/4, minimized at zero
    ancilla pre-squeezing; both evaluation routes must hit it."""
    r2 = 0.658
    expected = np.sinh(2.0 * r2) ** 2 / 4.0
    state = sts_state(0.0, r2)
    assert gip(state) == pytest.approx(expected, abs=1e-6)
    assert gip(state, method="fock", n_max=40) == pytest.approx(expected, abs=1e-4)


def test_fast_path_matches_fock_oracle_on_random_states():
    rng = np.random.default_rng(23)
    for _ in range(5):
        state = random_state(rng)
        fast = gip(state)
        oracle = gip(state, method="fock")
        assert abs(fast - oracle) < 1e-4


def test_gip_system_side_generator():
    # phase on the system side of a symmetric probe: same answer
    state = sts_state(0.4, 0.5)
    assert gip(state, side="system") == pytest.approx(gip(state), abs=1e-8)


def test_state_validation():
    with pytest.raises(ValueError):
        TwoModeState(np.eye(3))
    skew = np.eye(4)
    skew[0, 1] = 0.5
    with pytest.raises(ValueError):
        TwoModeState(skew)


@given(
    nu=st.floats(min_value=0.0, max_value=2.0),
    r=st.floats(min_value=0.0, max_value=1.2),
)
@settings(max_examples=25)
def test_probe_families_are_physical(nu, r):
    assert mts_state(nu, r).uncertainty_defect() > -1e-10
    assert sts_state(nu, r).uncertainty_defect() > -1e-10


# ------------------------------------------------------------- channels


def test_channel_family_matches_single_mode_dynamics(weak_kernels):
    """K sigma0 K^T + N must reproduce the covariance trajectory."""
    run = WeakCouplingRun(weak_kernels, temp_sys=1.0)
    sigma = covariance_trajectory(run)
    family = channel_family(weak_kernels)
    for idx in (0, 700, 2600, 5000):
        ch = family.lift(idx)
        s0 = run.sigma0 * np.eye(2)
        evolved = ch.k_mat @ s0 @ ch.k_mat.T + ch.n_mat
        assert np.max(np.abs(evolved - sigma[idx] * np.eye(2))) < 1e-9


def test_channel_lift_interpolates(weak_kernels):
    """Off-grid lift vs an exact table that has the point on-grid."""
    fine = coefficient_table(weak_kernels.params, t_max=8.0, t_step=0.001)
    off_grid = channel_lift(weak_kernels, 5.003)
    reference = channel_lift(fine, 5.003)
    assert np.max(np.abs(off_grid.k_mat - reference.k_mat)) < 1e-6
    assert np.max(np.abs(off_grid.n_mat - reference.n_mat)) < 1e-6
    assert channel_lift(weak_kernels, 5.0).t == 5.0
    with pytest.raises(ValueError, match="range"):
        channel_lift(weak_kernels, 1e4)


def test_channel_validation():
    with pytest.raises(ValueError):
        GaussianChannel(np.eye(2), -0.1 * np.eye(2), 1.0)


def test_evolve_joint_only_touches_one_side(weak_kernels):
    state = sts_state(0.5, 0.658)
    ch = channel_lift(weak_kernels, 3.0)
    out = evolve_joint(state, ch)
    assert np.array_equal(out.cm[2:, 2:], state.cm[2:, 2:])
    assert not np.array_equal(out.cm[:2, :2], state.cm[:2, :2])


def test_unphysical_evolution_warns():
    state = TwoModeState(0.5 * np.eye(4))
    shrink = GaussianChannel(0.1 * np.eye(2), np.zeros((2, 2)), 1.0)
    with pytest.warns(RuntimeWarning, match="uncertainty"):
        evolve_joint(state, shrink)


# -------------------------------------------------------------- witness


def test_positive_variation_counts_rises():
    assert positive_variation([0.0, 2.0, 1.0, 4.0]) == 5.0
    assert positive_variation([3.0, 2.0, 0.5]) == 0.0


def test_witness_is_positive_variation_of_the_measure():
    params = SpectralParams(0.1, 0.25, 1.0)
    table = coefficient_table(params, t_max=20.0, t_step=0.05)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        result = nonmarkovianity(sts_state(0.5, 0.658), table)
    assert result.value == pytest.approx(positive_variation(result.qg), rel=5e-3)
    assert result.value > 0.0


def test_witness_vanishes_without_coupling():
    table = coefficient_table(SpectralParams(0.0, 0.25, 1.0), t_max=15.0,
                              t_step=0.05)
    result = nonmarkovianity(mts_state(0.5, 0.658), table)
    assert result.value < 1e-12
    assert np.max(result.qg) - np.min(result.qg) < 1e-10


def test_witness_vanishes_on_the_semigroup():
    t = np.linspace(0.0, 15.0, 301)
    family = semigroup_family(delta_inf=4e-3, gamma_inf=3e-3, t=t)
    result = nonmarkovianity(sts_state(0.5, 0.658), family)
    assert result.value == 0.0
    assert np.all(np.diff(result.qg) <= 1e-12)
