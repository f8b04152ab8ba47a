"""Experiment orchestration: single runs, sweeps, deterministic merge.

A run computes every requested output for one parameter point; a sweep
repeats the run along one axis and merges rows in axis order.  Rows are
independent, so the sweep can fan out over a process pool; the merge
is by submission order and the numeric pipeline is seedless, which
together make outputs bitwise independent of the worker count.

Wall time is measured and kept on the ResultBundle for reporting, but
never written into emitted files (outputs must be byte-identical
across reruns).
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .backflow import backflow_measure, threshold_coupling
from .config import apply_sweep_value, config_echo
from .counting_field import fcs_first_moment
from .errors import ConfigError
from .exact_bath import recurrence_time
from .exact_bath import energy_trace as exact_energy_trace
from .witness import channel_family, mts_state, nonmarkovianity, sts_state
from .kernels import coefficient_table, discretize_bath
from .weak_coupling import WeakCouplingRun
from .weak_coupling import energy_trace as analytic_energy_trace

__all__ = ["ResultBundle", "run", "sweep"]


@dataclass
class ResultBundle:
    """Everything a run produced: tables, diagnostics, config echo.

    tables maps a table name (theta, energies, backflow, gip,
    threshold, sweep) to an ordered {column: list} mapping.  metadata
    is JSON-ready.  wall_time stays out of metadata deliberately.
    """

    config: object
    tables: dict = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)
    wall_time: float = 0.0


def _fmt_value(value):
    return repr(float(value))


def _column_name(base, engine, engines):
    return base if len(engines) == 1 else f"{base}_{engine}"


def _needs_kernels(config):
    if "gip" in config.outputs:
        return True
    series = {"theta", "energies"} & set(config.outputs)
    if series and ({"analytic", "fcs_check"} & set(config.engines)):
        return True
    if "backflow" in config.outputs and ({"analytic", "fcs_check"} & set(config.engines)):
        return True
    return False


def _engine_traces(config, kernels):
    """EnergyTrace per engine for the series outputs."""
    traces = {}
    for engine in config.engines:
        if engine == "analytic":
            traces[engine] = analytic_energy_trace(
                WeakCouplingRun(kernels, temp_sys=config.temp_sys)
            )
        elif engine == "fcs_check":
            traces[engine] = fcs_first_moment(
                WeakCouplingRun(kernels, temp_sys=config.temp_sys)
            )
        elif engine == "exact":
            modes = discretize_bath(
                config.spectral, n_modes=config.n_modes, omega_max=config.omega_max
            )
            traces[engine] = exact_energy_trace(
                modes,
                temp_sys=config.temp_sys,
                temp_env=config.spectral.temp_env,
                t_max=config.t_max,
                t_step=config.t_step,
            )
    return traces


def run(config):
    """Execute one parameter point; returns a ResultBundle."""
    t_start = time.perf_counter()
    tables = {}
    metadata = {"config": config_echo(config), "diagnostics": {}}

    kernels = None
    if _needs_kernels(config):
        kernels = coefficient_table(
            config.spectral, t_max=config.t_max, t_step=config.t_step
        )

    if "exact" in config.engines or "threshold" in config.outputs:
        modes = discretize_bath(
            config.spectral, n_modes=config.n_modes, omega_max=config.omega_max
        )
        spacing = modes.spacing
        metadata["diagnostics"]["exact"] = {
            "n_modes": modes.n_modes,
            "omega_max": float(modes.freqs[-1] + spacing / 2.0),
            "recurrence_time": recurrence_time(modes),
            "horizon": min(config.t_max, 0.5 * recurrence_time(modes)),
        }

    series_outputs = {"theta", "energies"} & set(config.outputs)
    traces = {}
    if series_outputs:
        if "energies" in config.outputs and "fcs_check" in config.engines:
            raise ConfigError(
                "the fcs_check engine measures theta and dq_env only; "
                "request outputs=['theta'] or drop the engine"
            )
        traces = _engine_traces(config, kernels)

    if "theta" in config.outputs:
        table = {"t": list(map(float, traces[config.engines[0]].t))}
        for engine in config.engines:
            table[_column_name("theta", engine, config.engines)] = list(
                map(float, traces[engine].theta)
            )
        tables["theta"] = table

    if "energies" in config.outputs:
        table = {"t": list(map(float, traces[config.engines[0]].t))}
        for engine in config.engines:
            trace = traces[engine]
            table[_column_name("de_sys", engine, config.engines)] = list(
                map(float, trace.de_sys)
            )
            table[_column_name("dq_env", engine, config.engines)] = list(
                map(float, trace.dq_env)
            )
            if trace.dh_int is not None:
                table[_column_name("dh_int", engine, config.engines)] = list(
                    map(float, trace.dh_int)
                )
            if trace.phi is not None:
                table[_column_name("phi", engine, config.engines)] = list(
                    map(float, trace.phi)
                )
        tables["energies"] = table

    if "backflow" in config.outputs:
        if config.temp_sys < config.spectral.temp_env:
            raise ConfigError(
                "backflow output needs temp_sys >= temp_env "
                f"(got {config.temp_sys} < {config.spectral.temp_env})"
            )
        table = {
            "engine": [],
            "value": [],
            "maximizer_temp": [],
            "truncation_time": [],
            "tail_bound": [],
        }
        for engine in config.engines:
            result = backflow_measure(
                config.spectral,
                engine=engine,
                temp_sys_grid=(config.temp_sys,),
                t_max=config.t_max,
                t_step=config.t_step,
                n_modes=config.n_modes,
                omega_max=config.omega_max,
                tail_tol=config.tail_tol,
                tail_rel=config.tail_rel,
            )
            table["engine"].append(engine)
            table["value"].append(result.value)
            table["maximizer_temp"].append(result.maximizer_temp)
            table["truncation_time"].append(result.truncation_time)
            table["tail_bound"].append(result.tail_bound)
        tables["backflow"] = table

    if "gip" in config.outputs:
        family = channel_family(kernels)
        nu = config.gip.k - 0.5
        states = {
            "mts": lambda: mts_state(nu, config.gip.r1),
            "sts": lambda: sts_state(nu, config.gip.r2),
        }
        table = {"t": list(map(float, family.t))}
        witness_values = {}
        for tag in config.gip.families:
            result = nonmarkovianity(states[tag](), family, side=config.gip.side)
            table[f"qg_{tag}"] = list(map(float, result.qg))
            witness_values[f"nq_{tag}"] = result.value
        tables["gip"] = table
        metadata["gip"] = witness_values

    if "threshold" in config.outputs:
        result = threshold_coupling(
            config.spectral.cutoff,
            config.spectral.temp_env,
            engine="exact",
            lam_lo=config.threshold.lam_lo,
            lam_hi=config.threshold.lam_hi,
            lam_tol=config.threshold.lam_tol,
            t_max=config.t_max,
            t_step=config.t_step,
            n_modes=config.n_modes,
            omega_max=config.omega_max,
        )
        tables["threshold"] = {
            "lam_star": [result.lam_star],
            "bracket_lo": [result.bracket[0]],
            "bracket_hi": [result.bracket[1]],
            "evaluations": [len(result.evaluations)],
        }

    return ResultBundle(
        config=config,
        tables=tables,
        metadata=metadata,
        wall_time=time.perf_counter() - t_start,
    )


def _safe_run(config):
    """Sweep worker: never raises, reports failures as strings."""
    try:
        return "ok", run(config)
    except Exception as exc:  # noqa: BLE001 - per-row failures are recorded
        return "error", f"{type(exc).__name__}: {exc}"


def _scalar_row(bundle, config):
    """Flatten one row bundle into {column: value} for the sweep table."""
    row = {}
    if "backflow" in bundle.tables:
        table = bundle.tables["backflow"]
        for engine, value in zip(table["engine"], table["value"]):
            row[_column_name("backflow", engine, config.engines)] = value
    if "gip" in bundle.metadata:
        row.update(bundle.metadata["gip"])
    if "threshold" in bundle.tables:
        row["lam_star"] = bundle.tables["threshold"]["lam_star"][0]
    return row


def sweep(config, threads=1):
    """Run every sweep-axis value and merge rows in axis order.

    Failures are recorded per row (status column + metadata) and do not
    abort the remaining rows.
    """
    if config.sweep is None:
        raise ConfigError("sweep requires a [sweep] table in the config")
    t_start = time.perf_counter()
    parameter = config.sweep.parameter
    row_configs = [apply_sweep_value(config, v) for v in config.sweep.values]

    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(_safe_run, row_configs))
    else:
        outcomes = [_safe_run(c) for c in row_configs]

    tables = {}
    metadata = {"config": config_echo(config), "diagnostics": {}, "sweep_rows": []}
    scalar_outputs = {"backflow", "gip", "threshold"} & set(config.outputs)
    series_outputs = {"theta", "energies"} & set(config.outputs)

    scalar_columns = []
    scalar_rows = []
    for value, (status, payload) in zip(config.sweep.values, outcomes):
        entry = {"value": value, "status": status}
        if status == "ok":
            row = _scalar_row(payload, config)
            diag = payload.metadata.get("diagnostics", {})
            if diag:
                entry["diagnostics"] = diag
        else:
            row = {}
            entry["error"] = payload
        metadata["sweep_rows"].append(entry)
        scalar_rows.append(row)
        for name in row:
            if name not in scalar_columns:
                scalar_columns.append(name)

    if scalar_outputs:
        table = {parameter: list(config.sweep.values), "status": []}
        for name in scalar_columns:
            table[name] = []
        for row, (status, _) in zip(scalar_rows, outcomes):
            table["status"].append(status)
            for name in scalar_columns:
                table[name].append(row.get(name))
        tables["sweep"] = table

    for output in ("theta", "energies"):
        if output not in series_outputs:
            continue
        merged = None
        for value, (status, payload) in zip(config.sweep.values, outcomes):
            if status != "ok" or output not in payload.tables:
                continue
            source = payload.tables[output]
            if merged is None:
                merged = {"t": source["t"]}
            for name, column in source.items():
                if name == "t":
                    continue
                merged[f"{name}_{parameter}_{_fmt_value(value)}"] = column
        if merged is not None:
            tables[output] = merged

    return ResultBundle(
        config=config,
        tables=tables,
        metadata=metadata,
        wall_time=time.perf_counter() - t_start,
    )
