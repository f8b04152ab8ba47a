"""Exact dynamics for the oscillator + N-mode bath at arbitrary coupling.

The full Hamiltonian is quadratic,

    H = 1/2 sum_i P_i^2 + R^T M R,   R = (X_1..X_N, X_sys),

with the potential matrix M carrying omega_i^2/2 on the bath diagonal,
omega_0^2/2 in the system corner and -g_i/2 couplings.  One dense
symmetric eigendecomposition M = O diag(d_i^2/2) O^T gives normal modes
that evolve freely, so propagation to any time is exact (no stepping)
and valid at any coupling for which M stays positive definite.

Two evaluation paths exist on purpose:

* an explicit symplectic propagator S(t) acting on full covariance
  matrices (the API mirrors textbook Gaussian mechanics and is used by
  the structural tests), and
* a normal-mode trajectory path that never forms S(t) and gets every
  energy observable as O(N^2) Hadamard quadratic forms per time point,
  used for production sweeps.

They are cross-checked against each other in the test suite.

The finite bath is recurrent: trajectories beyond half the Poincare
time 2 pi / dw are refused with a warning.  Mode ordering in
covariance matrices is (X_1..X_N, X_sys, P_1..P_N, P_sys).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import InstabilityError
from .kernels import BathModes
from .traces import EnergyTrace

__all__ = [
    "StarHamiltonian",
    "NormalModeBasis",
    "SymplecticPropagator",
    "FullCovariance",
    "assemble",
    "normal_modes",
    "propagator",
    "initial_covariance",
    "evolve",
    "energy_partition",
    "energy_flow_exact",
    "energy_trace",
    "recurrence_time",
]


@dataclass(frozen=True)
class StarHamiltonian:
    """Potential matrix of the star-coupled quadratic Hamiltonian.

    m_matrix is (N+1)x(N+1) with the system mode last.
    """

    m_matrix: np.ndarray
    modes: BathModes
    omega_sys: float = 1.0

    @property
    def n_total(self):
        return self.m_matrix.shape[0]


def assemble(modes, omega_sys=1.0):
    """Star Hamiltonian potential matrix from a bath discretization."""
    n = modes.n_modes
    m = np.zeros((n + 1, n + 1))
    m[np.arange(n), np.arange(n)] = 0.5 * modes.freqs**2
    m[n, n] = 0.5 * omega_sys**2
    m[:n, n] = -0.5 * modes.couplings
    m[n, :n] = -0.5 * modes.couplings
    return StarHamiltonian(m_matrix=m, modes=modes, omega_sys=omega_sys)


@dataclass(frozen=True)
class NormalModeBasis:
    """Orthogonal normal-mode transform: M = orth diag(freqs^2/2) orth^T."""

    orth: np.ndarray
    freqs: np.ndarray
    hamiltonian: StarHamiltonian


def normal_modes(ham):
    """Diagonalize the potential matrix; error out if it is not PD.

    A non-positive eigenvalue means the bare (counterterm-free) star
    Hamiltonian is unstable at this coupling/discretization; that is a
    property of the model, so it surfaces as InstabilityError instead
    of being patched.
    """
    evals, orth = np.linalg.eigh(ham.m_matrix)
    if evals[0] <= 0.0:
        p = ham.modes.params
        raise InstabilityError(
            f"star Hamiltonian not positive definite "
            f"(min eigenvalue {evals[0]:.3e}) at coupling={p.coupling}, "
            f"cutoff={p.cutoff}, n_modes={ham.modes.n_modes}",
            coupling=p.coupling,
            cutoff=p.cutoff,
            n_modes=ham.modes.n_modes,
        )
    return NormalModeBasis(orth=orth, freqs=np.sqrt(2.0 * evals), hamiltonian=ham)


@dataclass(frozen=True)
class SymplecticPropagator:
    """Blocks of S(t) in (X..., P...) ordering; the PP block equals XX."""

    mxx: np.ndarray
    mxp: np.ndarray
    mpx: np.ndarray
    t: float

    def matrix(self):
        return np.block([[self.mxx, self.mxp], [self.mpx, self.mxx]])


def propagator(basis, t):
    """S(t) from the cached eigendecomposition.

    X(t) = cos(dt) X + sin(dt)/d P and P(t) = -d sin(dt) X + cos(dt) P
    in the normal-mode frame; conjugating with the orthogonal transform
    gives the lab-frame blocks.  Cost O(N^2) per block given (O, d).
    """
    o = basis.orth
    d = basis.freqs
    c = np.cos(d * t)
    s = np.sin(d * t)
    mxx = (o * c) @ o.T
    mxp = (o * (s / d)) @ o.T
    mpx = -(o * (s * d)) @ o.T
    return SymplecticPropagator(mxx=mxx, mxp=mxp, mpx=mpx, t=float(t))


def _thermal_xx_pp(freq, temp):
    """Diagonal <X^2>, <P^2> of thermal oscillators; temp may be an array."""
    w, temp = np.broadcast_arrays(
        np.asarray(freq, dtype=float), np.asarray(temp, dtype=float)
    )
    cth = np.ones_like(w)
    hot = temp > 0
    cth[hot] = 1.0 / np.tanh(0.5 * w[hot] / temp[hot])
    return cth / (2.0 * w), 0.5 * w * cth


@dataclass(frozen=True)
class FullCovariance:
    """Covariance of all N+1 modes, ordering (X_1..X_sys, P_1..P_sys)."""

    sigma: np.ndarray

    @property
    def n_total(self):
        return self.sigma.shape[0] // 2

    def min_uncertainty_eig(self):
        """Smallest eigenvalue of sigma + i/2 Omega; >= 0 for states."""
        n = self.n_total
        omega = np.zeros((2 * n, 2 * n))
        omega[:n, n:] = np.eye(n)
        omega[n:, :n] = -np.eye(n)
        return float(np.linalg.eigvalsh(self.sigma + 0.5j * omega)[0])


def initial_covariance(temp_sys, temp_env, modes, omega_sys=1.0):
    """Factorized thermal state: bath at temp_env, system at temp_sys."""
    if temp_sys < 0 or temp_env < 0:
        raise ValueError("temperatures must be >= 0")
    freqs = np.append(modes.freqs, omega_sys)
    temps = np.append(np.full(modes.n_modes, float(temp_env)), float(temp_sys))
    xx, pp = _thermal_xx_pp(freqs, temps)
    return FullCovariance(sigma=np.diag(np.concatenate([xx, pp])))


def evolve(cov, prop):
    """sigma(t) = S sigma S^T."""
    s = prop.matrix()
    if s.shape[0] != cov.sigma.shape[0]:
        raise ValueError("propagator/covariance dimension mismatch")
    return FullCovariance(sigma=s @ cov.sigma @ s.T)


def _energies(cov, ham):
    """(E_sys, E_bath, E_int) of one covariance snapshot."""
    n = ham.modes.n_modes
    sig = cov.sigma
    xx = np.diag(sig)[: n + 1]
    pp = np.diag(sig)[n + 1 :]
    e_sys = 0.5 * pp[n] + 0.5 * ham.omega_sys**2 * xx[n]
    e_bath = 0.5 * np.sum(pp[:n]) + 0.5 * np.sum(ham.modes.freqs**2 * xx[:n])
    e_int = -float(np.sum(ham.modes.couplings * sig[:n, n]))
    return e_sys, e_bath, e_int


def energy_partition(cov_t, cov_0, ham):
    """(dE_sys, dq_env, dH_int) between two snapshots of the same system."""
    if cov_t.sigma.shape != cov_0.sigma.shape:
        raise ValueError("covariance dimension mismatch")
    et = _energies(cov_t, ham)
    e0 = _energies(cov_0, ham)
    return tuple(a - b for a, b in zip(et, e0))


def recurrence_time(modes):
    """Poincare revival time of the uniform discretization, 2 pi / dw."""
    return 2.0 * np.pi / modes.spacing


class _TrajectoryWorkspace:
    """Precomputed pieces for the O(N^2)-per-time energy evaluation.

    In the normal-mode frame the initial covariance has blocks
    A = O^T diag(<X^2>) O and B = O^T diag(<P^2>) O and no XP part, so
    for any lab-diagonal weight u (conjugated once into W = O^T u O)

        tr(W sxx(t)) = c^T (W o A) c + sb^T (W o B) sb,
        tr(W spp(t)) = ds^T (W o A) ds + c^T (W o B) c,

    with c = cos(dt), sb = sin(dt)/d, ds = d sin(dt) stacked over the
    whole grid ('o' is the elementwise product).  Time derivatives use
    d(c)/dt = -ds, d(sb)/dt = c, d(ds)/dt = d^2 c.
    """

    def __init__(self, basis, temp_sys, temp_env):
        ham = basis.hamiltonian
        modes = ham.modes
        n = modes.n_modes
        o = basis.orth
        xx0, pp0 = _thermal_xx_pp(
            np.append(modes.freqs, ham.omega_sys),
            np.append(np.full(n, float(temp_env)), float(temp_sys)),
        )
        self.a = (o.T * xx0) @ o
        self.b = (o.T * pp0) @ o
        self.d = basis.freqs
        self.e0 = None

        # lab-frame quadratic weights conjugated into the mode frame
        u_bath_x = np.append(modes.freqs**2, 0.0)
        u_bath_p = np.append(np.ones(n), 0.0)
        u_sys_x = np.zeros(n + 1)
        u_sys_x[n] = ham.omega_sys**2
        u_sys_p = np.zeros(n + 1)
        u_sys_p[n] = 1.0
        w_int = np.zeros((n + 1, n + 1))
        w_int[:n, n] = -0.5 * modes.couplings
        w_int[n, :n] = -0.5 * modes.couplings

        def conj_diag(u):
            return (o.T * u) @ o

        self.h = {}
        for tag, w in (
            ("bath_x", conj_diag(u_bath_x)),
            ("bath_p", conj_diag(u_bath_p)),
            ("sys_x", conj_diag(u_sys_x)),
            ("sys_p", conj_diag(u_sys_p)),
            ("int_x", o.T @ w_int @ o),
        ):
            self.h[tag] = (w * self.a, w * self.b)

    def quad_forms(self, tag, left, right):
        """x^T (W o A) y and x^T (W o B) y batched over the grid."""
        ha, hb = self.h[tag]
        qa = np.sum(left * (ha @ right), axis=0)
        qb = np.sum(left * (hb @ right), axis=0)
        return qa, qb

    def energies(self, t_grid):
        """E_sys, E_bath, E_int, theta, phi stacked over t_grid."""
        d = self.d[:, None]
        dt = d * t_grid[None, :]
        c = np.cos(dt)
        sb = np.sin(dt) / d
        ds = np.sin(dt) * d
        d2c = d * d * c

        # tr over sxx(t) uses (c, sb) pairs, spp(t) uses (ds, c)
        bx_a, bx_b = self.quad_forms("bath_x", c, c)
        bx2_a, bx2_b = self.quad_forms("bath_x", sb, sb)
        bp_a, bp_b = self.quad_forms("bath_p", ds, ds)
        bp2_a, bp2_b = self.quad_forms("bath_p", c, c)
        e_bath = 0.5 * (bx_a + bx2_b) + 0.5 * (bp_a + bp2_b)

        sx_a, _ = self.quad_forms("sys_x", c, c)
        _, sx_b = self.quad_forms("sys_x", sb, sb)
        sp_a, _ = self.quad_forms("sys_p", ds, ds)
        _, sp_b = self.quad_forms("sys_p", c, c)
        e_sys = 0.5 * (sx_a + sx_b) + 0.5 * (sp_a + sp_b)

        ix_a, _ = self.quad_forms("int_x", c, c)
        _, ix_b = self.quad_forms("int_x", sb, sb)
        e_int = ix_a + ix_b

        # theta = d/dt E_bath via the chain rule on (c, sb, ds)
        thx_a, _ = self.quad_forms("bath_x", ds, c)
        _, thx_b = self.quad_forms("bath_x", c, sb)
        thp_a, _ = self.quad_forms("bath_p", d2c, ds)
        _, thp_b = self.quad_forms("bath_p", ds, c)
        theta = -thx_a + thx_b + thp_a - thp_b

        phx_a, _ = self.quad_forms("sys_x", ds, c)
        _, phx_b = self.quad_forms("sys_x", c, sb)
        php_a, _ = self.quad_forms("sys_p", d2c, ds)
        _, php_b = self.quad_forms("sys_p", ds, c)
        phi = -phx_a + phx_b + php_a - php_b

        return e_sys, e_bath, e_int, theta, phi

    def theta(self, t_grid):
        """Just the flow theta(t); cheaper when energies are not needed."""
        d = self.d[:, None]
        dt = d * t_grid[None, :]
        c = np.cos(dt)
        sb = np.sin(dt) / d
        ds = np.sin(dt) * d
        d2c = d * d * c
        thx_a, _ = self.quad_forms("bath_x", ds, c)
        _, thx_b = self.quad_forms("bath_x", c, sb)
        thp_a, _ = self.quad_forms("bath_p", d2c, ds)
        _, thp_b = self.quad_forms("bath_p", ds, c)
        return -thx_a + thx_b + thp_a - thp_b


def _check_horizon(modes, t_end):
    t_rec = recurrence_time(modes)
    if t_end > 0.5 * t_rec:
        warnings.warn(
            f"horizon {t_end:g} exceeds half the recurrence time "
            f"{t_rec:g} of the N={modes.n_modes} bath; revivals will "
            "contaminate the trajectory",
            stacklevel=3,
        )


def energy_trace(modes, temp_sys, temp_env, t_max=50.0, t_step=0.01,
                 omega_sys=1.0, uncertainty_stride=None):
    """EnergyTrace over a uniform grid via the normal-mode fast path.

    uncertainty_stride, if given, additionally reconstructs the full
    covariance every that-many grid points and verifies the uncertainty
    relation (slow; meant for validation runs).
    """
    n = int(round(t_max / t_step))
    t_grid = np.linspace(0.0, n * t_step, n + 1)
    _check_horizon(modes, t_grid[-1])
    basis = normal_modes(assemble(modes, omega_sys=omega_sys))
    ws = _TrajectoryWorkspace(basis, temp_sys, temp_env)
    e_sys, e_bath, e_int, theta, phi = ws.energies(t_grid)

    if uncertainty_stride is not None:
        cov0 = initial_covariance(temp_sys, temp_env, modes, omega_sys=omega_sys)
        for i in range(0, t_grid.size, uncertainty_stride):
            cov = evolve(cov0, propagator(basis, t_grid[i]))
            low = cov.min_uncertainty_eig()
            if low < -1e-9:
                raise InstabilityError(
                    f"uncertainty relation violated at t={t_grid[i]:g} "
                    f"(min eig {low:.3e}); propagation is inconsistent"
                )

    p = modes.params
    return EnergyTrace(
        t=t_grid,
        theta=theta,
        de_sys=e_sys - e_sys[0],
        dq_env=e_bath - e_bath[0],
        dh_int=e_int - e_int[0],
        phi=phi,
        engine="exact",
        params={
            "coupling": p.coupling,
            "cutoff": p.cutoff,
            "temp_env": temp_env,
            "temp_sys": temp_sys,
            "n_modes": modes.n_modes,
            "omega_max": float(modes.freqs[-1] + 0.5 * modes.spacing),
            "t_max": float(t_grid[-1]),
            "t_step": t_step,
            "recurrence_time": recurrence_time(modes),
        },
    )


def energy_flow_exact(modes, temp_sys, temp_env, t_grid, omega_sys=1.0,
                      basis=None):
    """theta(t) on an arbitrary time array (analytic derivative, no FD).

    Pass a precomputed basis to amortize the eigendecomposition over
    several initial temperatures (the backflow maximization does).
    """
    t_grid = np.asarray(t_grid, dtype=float)
    _check_horizon(modes, float(t_grid.max()))
    if basis is None:
        basis = normal_modes(assemble(modes, omega_sys=omega_sys))
    ws = _TrajectoryWorkspace(basis, temp_sys, temp_env)
    return ws.theta(t_grid)
