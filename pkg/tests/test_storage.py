import json
import re

import numpy as np
import pytest
import yaml

from app.config import Config, LoggingSettings, RuntimeSettings
from app.errors import ConfigError
from app.fields.grid import Grid2D
from app.storage import (
    CsvLog,
    RunStorage,
    decode_field,
    encode_field,
    generate_unique_run_name,
    read_csv,
    read_field,
    read_series,
    read_snapshot,
    series_path,
    write_series,
    write_snapshot,
)
from app.storage.chbf import HEADER_DTYPE
from app.utils import template_utils
from conftest import small_config


def test_header_is_29_bytes():
    assert HEADER_DTYPE.itemsize == 29
    grid = Grid2D(5, 4, 2.0, 1.0)
    data = encode_field(grid, np.zeros(grid.shape))
    assert data[:4] == b"CHBF"
    assert data[4] == 1
    assert int.from_bytes(data[5:9], "little") == 5
    assert int.from_bytes(data[9:13], "little") == 4
    assert np.frombuffer(data[13:29], dtype="<f8").tolist() == [2.0, 1.0]
    assert len(data) == 29 + 8 * 20


def test_scalar_and_vector_round_trip(tmp_path, rng):
    grid = Grid2D(6, 5, 1.5, 1.0)
    phi = rng.standard_normal(grid.shape)
    u = rng.standard_normal((2,) + grid.shape)

    got_grid, got = read_snapshot(write_snapshot(tmp_path / "phi.chbf", grid, phi))
    assert got_grid == grid
    np.testing.assert_array_equal(got, phi)

    vec_bytes = encode_field(grid, u)
    assert len(vec_bytes) == 29 + 1 + 2 * 8 * grid.size
    _, got_u = decode_field(vec_bytes)
    np.testing.assert_array_equal(got_u, u)


def test_payload_is_row_major_with_x_first():
    grid = Grid2D(4, 4)
    field = np.arange(16.0).reshape(grid.shape)
    payload = np.frombuffer(encode_field(grid, field)[29:], dtype="<f8")
    # field[i, j] with i along x sits at i * ny + j
    assert payload[1 * 4 + 2] == field[1, 2]


def test_bad_magic_and_truncation():
    grid = Grid2D(4, 4)
    data = bytearray(encode_field(grid, np.ones(grid.shape)))
    data[:4] = b"NOPE"
    with pytest.raises(ConfigError, match="bad magic"):
        decode_field(bytes(data))
    with pytest.raises(ConfigError, match="truncated"):
        decode_field(b"CHBF")
    good = encode_field(grid, np.ones(grid.shape))
    with pytest.raises(ConfigError, match="payload"):
        decode_field(good[:-8])


def test_wrong_shape_is_rejected():
    with pytest.raises(ConfigError):
        encode_field(Grid2D(4, 4), np.zeros((4, 5)))


def test_read_field_checks_grid(tmp_path):
    path = write_snapshot(tmp_path / "f.chbf", Grid2D(4, 4), np.zeros((4, 4)))
    with pytest.raises(ConfigError, match="does not match"):
        read_field(path, Grid2D(8, 8))
    with pytest.raises(ConfigError, match="vector"):
        read_field(path, Grid2D(4, 4), vector=True)


def test_missing_file_is_config_error(tmp_path):
    with pytest.raises(ConfigError, match="Cannot read"):
        read_snapshot(tmp_path / "absent.chbf")


def test_series_round_trip_and_gaps(tmp_path, rng):
    grid = Grid2D(4, 4)
    fields = rng.standard_normal((3,) + grid.shape)
    paths = write_series(tmp_path / "s", "phi", grid, fields)
    assert [p.name for p in paths] == ["phi_000000.chbf", "phi_000001.chbf", "phi_000002.chbf"]
    np.testing.assert_array_equal(read_series(tmp_path / "s", "phi", grid), fields)

    series_path(tmp_path / "s", "phi", 1).unlink()
    with pytest.raises(ConfigError, match="missing index 1"):
        read_series(tmp_path / "s", "phi", grid)
    with pytest.raises(ConfigError, match="No CHBF series"):
        read_series(tmp_path / "s", "u", grid, vector=True)


def test_csv_log_writes_header_and_rows(tmp_path):
    path = tmp_path / "log.csv"
    with CsvLog(path, ["step", "value"]) as log:
        log.write({"step": 0, "value": 0.1, "extra": "ignored"})
        log.write_many([{"step": 1, "value": 1e-17}])
    rows = read_csv(path)
    assert rows == [{"step": "0", "value": "0.1"}, {"step": "1", "value": "1e-17"}]
    assert log.rows == 2


def test_csv_log_missing_column(tmp_path):
    with CsvLog(tmp_path / "log.csv", ["step", "value"]) as log:
        with pytest.raises(ConfigError, match="value"):
            log.write({"step": 0})


def test_run_storage_artifacts(tmp_path):
    storage = RunStorage(tmp_path / "run")
    grid = Grid2D(4, 4)

    field_path = storage.save_field("final_phi", grid, np.full(grid.shape, 0.25))
    assert field_path.name == "final_phi.chbf"
    series_dir = storage.save_series("phi", grid, [np.zeros(grid.shape)] * 2, subdir="snapshots")
    assert sorted(p.name for p in series_dir.iterdir()) == ["phi_000000.chbf", "phi_000001.chbf"]

    json_path = storage.save_json("report", {"b": 1, "a": [1.0, 2.0]})
    assert json.loads(json_path.read_text()) == {"a": [1.0, 2.0], "b": 1}

    cfg = small_config()
    cfg_path = storage.save_config(cfg)
    assert yaml.safe_load(cfg_path.read_text())["grid"]["nx"] == 16

    csv_path = storage.save_csv("iterates", ["iter"], [{"iter": 0}, {"iter": 1}])
    assert [r["iter"] for r in read_csv(csv_path)] == ["0", "1"]


def test_render_script_uses_default_template(tmp_path):
    storage = RunStorage(tmp_path)
    path = storage.render_script("plot_optimization", {
        "run_name": "demo",
        "script_name": "plot_optimization.py",
        "csv_name": "optimization_log.csv",
        "figure_name": "optimization.png",
        "title": "a < b & c",
        "kkt_target": "1e-06",
    })
    text = path.read_text()
    assert path.name == "plot_optimization.py"
    assert 'CSV = HERE / "optimization_log.csv"' in text
    # no HTML escaping
    assert "a < b & c" in text
    assert "axhline(1e-06" in text


def test_custom_template_dir_wins(tmp_path, monkeypatch):
    (tmp_path / "plot_diagnostics.py.mustache").write_text("# {{run_name}}\n", encoding="utf-8")
    cfg = Config(logging=LoggingSettings(), runtime=RuntimeSettings(template_dir=tmp_path))
    monkeypatch.setattr(template_utils, "get_config", lambda: cfg)
    assert template_utils.render_template("plot_diagnostics", {"run_name": "custom"}) == "# custom\n"
    # templates missing from the custom dir fall back to the packaged ones
    found = template_utils.find_plot_template("plot_optimization")
    assert found.parent == template_utils.DEFAULT_TEMPLATE_DIR


def test_template_names_are_not_paths():
    with pytest.raises(ConfigError, match="path separators"):
        template_utils.find_plot_template("../plot_diagnostics")
    with pytest.raises(ConfigError, match="not found"):
        template_utils.find_plot_template("no_such_plot")


def test_unique_run_name_format():
    a = generate_unique_run_name("simulate")
    b = generate_unique_run_name("simulate")
    assert re.fullmatch(r"simulate-\d{8}-\d{6}-[0-9a-f]{8}", a)
    assert a != b
