"""Energy-exchange statistics for quantum Brownian motion.

Two independent engines for the two-time-measurement energy flow (an
analytic weak-coupling path and an exact finite-bath symplectic path),
a counting-field cross-check, the energy backflow measure with its
vanishing threshold, and a Gaussian-interferometric-power witness of
non-Markovianity.  Units: hbar = k_B = 1, system frequency omega_0 = 1.
"""

from .backflow import (
    BackflowResult,
    FlowSeries,
    ThresholdResult,
    backflow_integral,
    backflow_measure,
    negative_part_integral,
    threshold_coupling,
)
from .config import SimulationConfig, load_config
from .counting_field import cgf_trajectory, fcs_first_moment
from .errors import ConfigError, InstabilityError, NumericsError, TruncationError
from .exact_bath import (
    StarHamiltonian,
    assemble,
    energy_flow_exact,
    initial_covariance,
    normal_modes,
    propagator,
    recurrence_time,
)
from .exact_bath import energy_trace as exact_energy_trace
from .witness import (
    TwoModeState,
    channel_family,
    channel_lift,
    evolve_joint,
    gip,
    gip_trajectory,
    mts_state,
    nonmarkovianity,
    sts_state,
)
from .kernels import (
    BathModes,
    KernelTable,
    SpectralParams,
    coefficient_table,
    correlation_function,
    discretize_bath,
    dissipation_kernel,
    noise_kernel,
    spectral_density,
)
from .runner import ResultBundle, run, sweep
from .traces import EnergyTrace
from .weak_coupling import (
    MarkovLimit,
    WeakCouplingRun,
    covariance_trajectory,
    energy_flow,
    markov_limit,
    thermal_sigma,
)
from .weak_coupling import energy_trace as analytic_energy_trace

__all__ = [
    "BackflowResult",
    "BathModes",
    "ConfigError",
    "EnergyTrace",
    "FlowSeries",
    "InstabilityError",
    "KernelTable",
    "MarkovLimit",
    "NumericsError",
    "ResultBundle",
    "SimulationConfig",
    "SpectralParams",
    "StarHamiltonian",
    "ThresholdResult",
    "TruncationError",
    "TwoModeState",
    "WeakCouplingRun",
    "analytic_energy_trace",
    "assemble",
    "backflow_integral",
    "backflow_measure",
    "cgf_trajectory",
    "channel_family",
    "channel_lift",
    "coefficient_table",
    "correlation_function",
    "covariance_trajectory",
    "discretize_bath",
    "dissipation_kernel",
    "energy_flow",
    "energy_flow_exact",
    "evolve_joint",
    "exact_energy_trace",
    "fcs_first_moment",
    "gip",
    "gip_trajectory",
    "initial_covariance",
    "load_config",
    "markov_limit",
    "mts_state",
    "negative_part_integral",
    "noise_kernel",
    "nonmarkovianity",
    "normal_modes",
    "propagator",
    "recurrence_time",
    "run",
    "spectral_density",
    "sts_state",
    "sweep",
    "thermal_sigma",
    "threshold_coupling",
    "__version__",
]

__version__ = "0.1.0"
