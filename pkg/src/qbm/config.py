"""Run configuration: TOML schema, validation, canonical echo.

Schema (all tables optional unless an output needs them):

    engine  = "analytic"            # or a list: ["analytic", "exact"]
    outputs = ["theta"]             # theta | energies | backflow | gip | threshold

    [spectral]
    coupling = 0.01
    cutoff   = 0.25
    temp_env = 1.0

    [run]
    temp_sys = 1.0
    t_max    = 30.0
    t_step   = 0.01

    [bath]                          # exact-engine discretization
    n_modes   = 150
    omega_max = 8.0                 # default max(8, 8 cutoff)

    [backflow]
    tail_tol = 1e-7
    tail_rel = 0.01

    [gip]
    k        = 1.0                  # k = nu + 1/2
    r1       = 0.658
    r2       = 0.658
    families = ["mts", "sts"]
    side     = "ancilla"

    [threshold]
    lam_lo  = 0.01
    lam_hi  = 1.8
    lam_tol = 0.01

    [sweep]                         # for `qbm sweep` only
    parameter = "coupling"          # coupling | cutoff | temp_env | temp_sys
    values    = [0.01, 0.02, 0.05]

Everything is deterministic; there is no seed anywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

from .errors import ConfigError
from .kernels import SpectralParams

__all__ = [
    "GipParams",
    "ThresholdParams",
    "SweepSpec",
    "SimulationConfig",
    "load_config",
    "config_from_mapping",
    "config_echo",
]

ENGINES = ("analytic", "exact", "fcs_check")
OUTPUTS = ("theta", "energies", "backflow", "gip", "threshold")
SWEEP_PARAMETERS = ("coupling", "cutoff", "temp_env", "temp_sys")
GIP_FAMILIES = ("mts", "sts")


@dataclass(frozen=True)
class GipParams:
    k: float = 1.0
    r1: float = 0.658
    r2: float = 0.658
    families: tuple = ("mts", "sts")
    side: str = "ancilla"


@dataclass(frozen=True)
class ThresholdParams:
    lam_lo: float = 0.01
    lam_hi: float = 1.8
    lam_tol: float = 0.01


@dataclass(frozen=True)
class SweepSpec:
    parameter: str
    values: tuple


@dataclass(frozen=True)
class SimulationConfig:
    engines: tuple
    outputs: tuple
    spectral: SpectralParams
    temp_sys: float
    t_max: float = 50.0
    t_step: float = 0.01
    n_modes: int = 150
    omega_max: float = None
    tail_tol: float = 1e-7
    tail_rel: float = 0.01
    gip: GipParams = field(default_factory=GipParams)
    threshold: ThresholdParams = field(default_factory=ThresholdParams)
    sweep: SweepSpec = None


def _require(cond, message):
    if not cond:
        raise ConfigError(message)


def _as_float(mapping, table, key, default=None):
    if key not in mapping:
        _require(default is not None, f"[{table}] is missing required key {key!r}")
        return default
    value = mapping[key]
    _require(
        isinstance(value, (int, float)) and not isinstance(value, bool),
        f"[{table}] {key} must be a number, got {value!r}",
    )
    return float(value)


def _as_tuple(value, key, allowed):
    if isinstance(value, str):
        value = [value]
    _require(
        isinstance(value, (list, tuple)) and len(value) > 0,
        f"{key} must be a nonempty string or list",
    )
    out = []
    for item in value:
        _require(item in allowed, f"{key} entry {item!r} not in {allowed}")
        if item not in out:
            out.append(item)
    return tuple(out)


def config_from_mapping(data):
    """Build and validate a SimulationConfig from a parsed mapping."""
    _require(isinstance(data, dict), "config root must be a table")
    known = {
        "engine", "outputs", "spectral", "run", "bath",
        "backflow", "gip", "threshold", "sweep",
    }
    unknown = set(data) - known
    _require(not unknown, f"unknown config keys: {sorted(unknown)}")

    engines = _as_tuple(data.get("engine", "analytic"), "engine", ENGINES)
    outputs = _as_tuple(data.get("outputs", ["theta"]), "outputs", OUTPUTS)

    spectral_map = data.get("spectral")
    _require(isinstance(spectral_map, dict), "missing [spectral] table")
    try:
        spectral = SpectralParams(
            coupling=_as_float(spectral_map, "spectral", "coupling"),
            cutoff=_as_float(spectral_map, "spectral", "cutoff"),
            temp_env=_as_float(spectral_map, "spectral", "temp_env"),
        )
    except ValueError as exc:
        raise ConfigError(f"[spectral] {exc}") from exc

    run_map = data.get("run", {})
    _require(isinstance(run_map, dict), "[run] must be a table")
    temp_sys = _as_float(run_map, "run", "temp_sys", default=spectral.temp_env)
    t_max = _as_float(run_map, "run", "t_max", default=50.0)
    t_step = _as_float(run_map, "run", "t_step", default=0.01)
    _require(temp_sys >= 0, f"[run] temp_sys must be >= 0, got {temp_sys}")
    _require(t_max > 0, f"[run] t_max must be > 0, got {t_max}")
    _require(0 < t_step <= t_max, f"[run] t_step must be in (0, t_max], got {t_step}")

    bath_map = data.get("bath", {})
    _require(isinstance(bath_map, dict), "[bath] must be a table")
    n_modes = bath_map.get("n_modes", 150)
    _require(
        isinstance(n_modes, int) and not isinstance(n_modes, bool) and n_modes >= 2,
        f"[bath] n_modes must be an integer >= 2, got {n_modes!r}",
    )
    omega_max = None
    if "omega_max" in bath_map:
        omega_max = _as_float(bath_map, "bath", "omega_max")
        _require(omega_max > 0, f"[bath] omega_max must be > 0, got {omega_max}")

    back_map = data.get("backflow", {})
    _require(isinstance(back_map, dict), "[backflow] must be a table")
    tail_tol = _as_float(back_map, "backflow", "tail_tol", default=1e-7)
    tail_rel = _as_float(back_map, "backflow", "tail_rel", default=0.01)
    _require(tail_tol > 0, "[backflow] tail_tol must be > 0")
    _require(tail_rel > 0, "[backflow] tail_rel must be > 0")

    gip_map = data.get("gip", {})
    _require(isinstance(gip_map, dict), "[gip] must be a table")
    k_val = _as_float(gip_map, "gip", "k", default=1.0)
    _require(k_val >= 0.5, f"[gip] k = nu + 1/2 must be >= 0.5, got {k_val}")
    side = gip_map.get("side", "ancilla")
    _require(side in ("ancilla", "system"), f"[gip] side must be ancilla or system, got {side!r}")
    gip = GipParams(
        k=k_val,
        r1=_as_float(gip_map, "gip", "r1", default=0.658),
        r2=_as_float(gip_map, "gip", "r2", default=0.658),
        families=_as_tuple(gip_map.get("families", ["mts", "sts"]), "[gip] families", GIP_FAMILIES),
        side=side,
    )

    thr_map = data.get("threshold", {})
    _require(isinstance(thr_map, dict), "[threshold] must be a table")
    threshold = ThresholdParams(
        lam_lo=_as_float(thr_map, "threshold", "lam_lo", default=0.01),
        lam_hi=_as_float(thr_map, "threshold", "lam_hi", default=1.8),
        lam_tol=_as_float(thr_map, "threshold", "lam_tol", default=0.01),
    )
    _require(
        0 < threshold.lam_lo < threshold.lam_hi,
        "[threshold] needs 0 < lam_lo < lam_hi",
    )
    _require(threshold.lam_tol > 0, "[threshold] lam_tol must be > 0")

    sweep = None
    if "sweep" in data:
        sweep_map = data["sweep"]
        _require(isinstance(sweep_map, dict), "[sweep] must be a table")
        parameter = sweep_map.get("parameter")
        _require(
            parameter in SWEEP_PARAMETERS,
            f"[sweep] parameter must be one of {SWEEP_PARAMETERS}, got {parameter!r}",
        )
        raw = sweep_map.get("values")
        _require(
            isinstance(raw, (list, tuple)) and len(raw) > 0,
            "[sweep] values must be a nonempty list",
        )
        values = []
        for v in raw:
            _require(
                isinstance(v, (int, float)) and not isinstance(v, bool),
                f"[sweep] values must be numbers, got {v!r}",
            )
            values.append(float(v))
        _require(all(math.isfinite(v) for v in values), "[sweep] values must be finite")
        _require(values == sorted(values), "[sweep] values must be sorted ascending")
        _require(len(set(values)) == len(values), "[sweep] values must be distinct")
        sweep = SweepSpec(parameter=parameter, values=tuple(values))

    if "threshold" in outputs:
        _require(
            spectral.temp_env == temp_sys,
            "threshold output assumes temp_sys == temp_env "
            "(the measure is maximized at equal temperatures)",
        )
    return SimulationConfig(
        engines=engines,
        outputs=outputs,
        spectral=spectral,
        temp_sys=temp_sys,
        t_max=t_max,
        t_step=t_step,
        n_modes=n_modes,
        omega_max=omega_max,
        tail_tol=tail_tol,
        tail_rel=tail_rel,
        gip=gip,
        threshold=threshold,
        sweep=sweep,
    )


def load_config(path):
    """Parse and validate a TOML config file."""
    try:
        with open(path, "rb") as handle:
            data = tomllib.load(handle)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid TOML: {exc}") from exc
    return config_from_mapping(data)


def config_echo(config):
    """Canonical mapping form of a config; config_from_mapping inverts it."""
    echo = {
        "engine": list(config.engines),
        "outputs": list(config.outputs),
        "spectral": {
            "coupling": config.spectral.coupling,
            "cutoff": config.spectral.cutoff,
            "temp_env": config.spectral.temp_env,
        },
        "run": {
            "temp_sys": config.temp_sys,
            "t_max": config.t_max,
            "t_step": config.t_step,
        },
        "bath": {"n_modes": config.n_modes},
        "backflow": {"tail_tol": config.tail_tol, "tail_rel": config.tail_rel},
        "gip": {
            "k": config.gip.k,
            "r1": config.gip.r1,
            "r2": config.gip.r2,
            "families": list(config.gip.families),
            "side": config.gip.side,
        },
        "threshold": {
            "lam_lo": config.threshold.lam_lo,
            "lam_hi": config.threshold.lam_hi,
            "lam_tol": config.threshold.lam_tol,
        },
    }
    if config.omega_max is not None:
        echo["bath"]["omega_max"] = config.omega_max
    if config.sweep is not None:
        echo["sweep"] = {
            "parameter": config.sweep.parameter,
            "values": list(config.sweep.values),
        }
    return echo


def apply_sweep_value(config, value):
    """Config for one sweep row: axis value substituted, sweep spec dropped."""
    parameter = config.sweep.parameter
    if parameter == "temp_sys":
        return replace(config, temp_sys=value, sweep=None)
    spectral = replace(config.spectral, **{parameter: value})
    return replace(config, spectral=spectral, sweep=None)
