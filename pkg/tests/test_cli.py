"""End-to-end CLI behaviour: validation, determinism, exit codes.

All invocations go through qbm.cli.main with an argv list, writing to
pytest tmp directories.  Determinism is asserted at the byte level on
every emitted file, which is the contract the sweep merging and float
formatting were built around.
"""

import json
import textwrap
import xml.etree.ElementTree as ET
from pathlib import Path

import pytest

from qbm.cli import main
from qbm.config import apply_sweep_value, config_echo, config_from_mapping
from qbm.errors import ConfigError
from qbm.presets import preset_config, preset_names, preset_note

WEAK_RUN = """
    engine  = "analytic"
    outputs = ["theta", "backflow"]

    [spectral]
    coupling = 0.01
    cutoff   = 0.25
    temp_env = 1.0

    [run]
    t_max  = 20.0
    t_step = 0.01
"""

COUPLING_SWEEP = """
    engine  = "analytic"
    outputs = ["theta"]

    [spectral]
    coupling = 0.01
    cutoff   = 0.25
    temp_env = 1.0

    [run]
    t_max  = 5.0
    t_step = 0.01

    [sweep]
    parameter = "coupling"
    values    = [0.0, 0.01]
"""


def _write(tmp_path, body, name="config.toml"):
    path = tmp_path / name
    path.write_text(textwrap.dedent(body), encoding="utf-8")
    return path


def _tree_bytes(root):
    return {
        p.relative_to(root).as_posix(): p.read_bytes()
        for p in sorted(Path(root).rglob("*"))
        if p.is_file()
    }


# ------------------------------------------------------------- config


@pytest.mark.parametrize("name", preset_names())
def test_preset_configs_round_trip(name):
    config = preset_config(name)
    assert config_from_mapping(config_echo(config)) == config
    assert preset_note(name)


def test_unknown_keys_rejected():
    with pytest.raises(ConfigError, match="unknown"):
        config_from_mapping({"engine": "analytic", "outputs": ["theta"],
                             "spectral": {"coupling": 0.01, "cutoff": 0.25,
                                          "temp_env": 1.0},
                             "typo_section": {}})


def test_spectral_table_required():
    with pytest.raises(ConfigError, match="spectral"):
        config_from_mapping({"engine": "analytic", "outputs": ["theta"]})


def test_bad_engine_rejected():
    with pytest.raises(ConfigError, match="engine"):
        config_from_mapping({"engine": "magic", "outputs": ["theta"],
                             "spectral": {"coupling": 0.01, "cutoff": 0.25,
                                          "temp_env": 1.0}})


def test_empty_sweep_axis_rejected():
    with pytest.raises(ConfigError, match="values"):
        config_from_mapping({"engine": "analytic", "outputs": ["theta"],
                             "spectral": {"coupling": 0.01, "cutoff": 0.25,
                                          "temp_env": 1.0},
                             "sweep": {"parameter": "coupling", "values": []}})


def test_apply_sweep_value_drops_the_axis():
    config = preset_config("fig3a")
    point = apply_sweep_value(config, 0.05)
    assert point.sweep is None
    assert point.spectral.coupling == 0.05


# ---------------------------------------------------------------- runs


def test_zero_coupling_run_is_trivial(tmp_path):
    body = WEAK_RUN.replace("coupling = 0.01", "coupling = 0.0")
    cfg = _write(tmp_path, body)
    out = tmp_path / "out"
    assert main(["run", "--config", str(cfg), "--out", str(out)]) == 0

    lines = (out / "theta.csv").read_text().splitlines()
    assert lines[0] == "t,theta"
    assert all(line.split(",")[1] == "0.0" for line in lines[1:])

    sweep = (out / "backflow.csv").read_text().splitlines()
    value_col = sweep[0].split(",").index("value")
    assert float(sweep[1].split(",")[value_col]) == 0.0


def test_csv_floats_survive_round_trip(tmp_path):
    cfg = _write(tmp_path, WEAK_RUN)
    out = tmp_path / "out"
    assert main(["run", "--config", str(cfg), "--out", str(out)]) == 0
    from qbm.config import load_config
    from qbm.runner import run

    bundle = run(load_config(cfg))
    lines = (out / "theta.csv").read_text().splitlines()
    sampled = lines[1:10001:500]
    for line in sampled:
        t_str, theta_str = line.split(",")
        idx = bundle.tables["theta"]["t"].index(float(t_str))
        assert float(theta_str) == bundle.tables["theta"]["theta"][idx]


def test_repeated_runs_are_byte_identical(tmp_path):
    cfg = _write(tmp_path, WEAK_RUN)
    first, second = tmp_path / "a", tmp_path / "b"
    for out in (first, second):
        code = main(["run", "--config", str(cfg), "--out", str(out),
                     "--format", "csv,json,svg"])
        assert code == 0
    assert _tree_bytes(first) == _tree_bytes(second)


def test_json_and_svg_outputs_are_well_formed(tmp_path):
    cfg = _write(tmp_path, WEAK_RUN)
    out = tmp_path / "out"
    assert main(["run", "--config", str(cfg), "--out", str(out),
                 "--format", "json,svg"]) == 0

    payload = json.loads((out / "results.json").read_text())
    assert set(payload) == {"metadata", "tables"}
    assert "theta" in payload["tables"]
    assert "wall" not in json.dumps(payload["metadata"]).lower()

    svg = ET.parse(out / "theta.svg").getroot()
    assert svg.tag.endswith("svg")
    assert any(child.tag.endswith("polyline") for child in svg.iter())


# --------------------------------------------------------------- sweeps


def test_sweep_outputs_and_worker_invariance(tmp_path):
    cfg = _write(tmp_path, COUPLING_SWEEP)
    serial, pooled = tmp_path / "serial", tmp_path / "pooled"
    assert main(["sweep", "--config", str(cfg), "--out", str(serial),
                 "--format", "csv,json"]) == 0
    assert main(["sweep", "--config", str(cfg), "--out", str(pooled), "--threads", "2",
                 "--format", "csv,json"]) == 0
    assert _tree_bytes(serial) == _tree_bytes(pooled)

    header = (serial / "theta.csv").read_text().splitlines()[0]
    assert header == "t,theta_coupling_0.0,theta_coupling_0.01"


def test_sweep_reports_failed_rows_without_dying(tmp_path):
    """A row whose horizon cuts into live backflow errors out; the
    sweep still completes, flags the row and leaves its cells empty."""
    body = COUPLING_SWEEP.replace('outputs = ["theta"]',
                                  'outputs = ["backflow"]')
    cfg = _write(tmp_path, body)
    out = tmp_path / "out"
    assert main(["sweep", "--config", str(cfg), "--out", str(out),
                 "--format", "csv,json"]) == 0

    rows = (out / "sweep.csv").read_text().splitlines()
    assert rows[1].split(",")[1] == "ok"
    assert rows[2].split(",")[1] == "error"
    assert rows[2].endswith(",")

    meta = json.loads((out / "metadata.json").read_text())
    failed = meta["sweep_rows"][1]
    assert failed["status"] == "error"
    assert "TruncationError" in failed["error"]


def test_sweep_requires_sweep_section(tmp_path):
    cfg = _write(tmp_path, WEAK_RUN)
    assert main(["sweep", "--config", str(cfg), "--out", str(tmp_path / "x")]) == 2


def test_run_rejects_sweep_config(tmp_path):
    cfg = _write(tmp_path, COUPLING_SWEEP)
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "x")]) == 2


# ----------------------------------------------------------- exit codes


def test_missing_config_exits_2(tmp_path):
    assert main(["run", "--config", str(tmp_path / "nope.toml"),
                 "--out", str(tmp_path / "x")]) == 2


def test_malformed_toml_exits_2(tmp_path):
    cfg = tmp_path / "broken.toml"
    cfg.write_text("engine = [unclosed", encoding="utf-8")
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "x")]) == 2


def test_numerics_failure_exits_3(tmp_path):
    body = """
        engine  = "exact"
        outputs = ["theta"]

        [spectral]
        coupling = 3.0
        cutoff   = 0.25
        temp_env = 1.0

        [run]
        t_max  = 5.0
        t_step = 0.1

        [bath]
        n_modes = 40
    """
    cfg = _write(tmp_path, body)
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "x")]) == 3


def test_preset_listing(capsys):
    assert main(["preset", "--list"]) == 0
    listing = capsys.readouterr().out
    for name in ("fig1a", "fig4c", "fig6d"):
        assert name in listing


def test_unknown_preset_exits_2(tmp_path):
    assert main(["preset", "fig99", "--out", str(tmp_path / "x")]) == 2
