import csv
import hashlib
import json
import math

import pytest

from qtraj_witness.cli import main
from qtraj_witness.config import DEFAULTS, ConfigError, parse_config
from qtraj_witness.scenarios import HEADERS


def _read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def test_defaults_filled_in():
    cfg = parse_config({"scenario": "esd-compare"})
    assert cfg.parameters == DEFAULTS["esd-compare"]
    assert cfg.n_traj == 50_000 and cfg.seed == 0 and cfg.format == "csv"
    cfg = parse_config('{"scenario": "static-pair", "parameters": {"delta": 3}}', seed=5)
    assert cfg.parameters["delta"] == 3 and cfg.parameters["g0"] == 1.0 and cfg.seed == 5


@pytest.mark.parametrize(
    "doc, key",
    [
        ({"scenario": "static-pair", "foo": 1}, "foo"),
        ({"scenario": "static-pair", "parameters": {"foo": 1}}, "foo"),
        ({"scenario": "static-pair", "n_traj": 0}, "n_traj"),
        ({"scenario": "static-pair", "seed": -1}, "seed"),
        ({"scenario": "nope"}, "scenario"),
        ({"scenario": "static-pair", "format": "xml"}, "format"),
        ({}, "scenario"),
    ],
)
def test_config_rejections_name_the_key(doc, key):
    with pytest.raises(ConfigError) as info:
        parse_config(doc)
    assert info.value.key == key


def test_malformed_json():
    with pytest.raises(ConfigError, match="malformed"):
        parse_config('{"scenario": ')


def test_config_file(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"scenario": "witness-scatter", "n_traj": 7}))
    assert parse_config(str(path)).n_traj == 7


def test_static_pair_cli(tmp_path, capsys):
    assert main(["static-pair", "--out", str(tmp_path)]) == 0
    header, rows = _read_csv(tmp_path / "static_pair.csv")
    assert tuple(header) == HEADERS["static_pair"]
    c = [float(r[1]) for r in rows]
    assert abs(sum(c) / len(c) - 2 / math.pi) < 1e-6
    assert "static-pair:" in capsys.readouterr().out


def test_manifest_checksums(tmp_path):
    assert main(["witness-scatter", "--trajectories", "50", "--out", str(tmp_path), "--seed", "3"]) == 0
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["seed"] == 3 and manifest["config"]["n_traj"] == 50
    for name, digest in manifest["checksums"].items():
        assert hashlib.sha256((tmp_path / name).read_bytes()).hexdigest() == digest
    assert manifest["summary"]["violations"] == 0


def test_esd_compare_zero_crossing(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"scenario": "esd-compare", "parameters": {"t_end": 1.0, "n_points": 101}}))
    assert main(["esd-compare", "--config", str(cfg), "--trajectories", "200", "--out", str(tmp_path)]) == 0
    header, rows = _read_csv(tmp_path / "esd.csv")
    assert tuple(header) == HEADERS["esd"]
    first_zero = next(float(r[0]) for r in rows if float(r[1]) == 0.0)
    assert abs(first_zero - math.log(1.5)) <= 0.01


def test_s2_channels_cli(tmp_path):
    assert main(["s2-channels", "--trajectories", "500", "--out", str(tmp_path)]) == 0
    header, rows = _read_csv(tmp_path / "s2_channels.csv")
    assert tuple(header) == HEADERS["s2_channels"]
    by_channel = {r[0]: r for r in rows}
    assert set(by_channel) == {"A0", "A1", "A2", "A3"}
    assert by_channel["A2"][2] == "0"


def test_json_format(tmp_path):
    assert main(["witness-scatter", "--trajectories", "5", "--format", "json", "--out", str(tmp_path)]) == 0
    records = json.loads((tmp_path / "scatter.json").read_text())
    assert len(records) == 5 and set(records[0]) == set(HEADERS["scatter"])


def test_exit_codes(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"scenario": "static-pair", "parameters": {"foo": 1}}')
    assert main(["static-pair", "--config", str(bad)]) == 2
    assert "foo" in capsys.readouterr().err
    assert main(["static-pair", "--config", str(bad).replace("bad", "missing")]) == 2
    mismatch = tmp_path / "m.json"
    mismatch.write_text('{"scenario": "witness-scatter"}')
    assert main(["static-pair", "--config", str(mismatch)]) == 2
    coarse = tmp_path / "coarse.json"
    coarse.write_text(json.dumps({"scenario": "chi-distribution", "parameters": {"dt": 0.01}}))
    assert main(["chi-distribution", "--config", str(coarse), "--trajectories", "2", "--out", str(tmp_path)]) == 1
    assert "too coarse" in capsys.readouterr().err


def test_brownian_ensemble_small(tmp_path):
    cfg = {"scenario": "brownian-ensemble", "n_traj": 4,
           "parameters": {"t_end": 0.2, "dt": 1e-4, "D_grid": [1.0, 100.0], "record_every": 50}}
    path = tmp_path / "c.json"
    path.write_text(json.dumps(cfg))
    assert main(["brownian-ensemble", "--config", str(path), "--out", str(tmp_path)]) == 0
    header, rows = _read_csv(tmp_path / "brownian_traj.csv")
    assert tuple(header) == HEADERS["brownian_traj"]
    r3 = [float(r[1]) for r in rows]
    assert min(r3) >= 0.1 and max(r3) <= 0.9
    _, sweep = _read_csv(tmp_path / "diffusivity_sweep.csv")
    assert [float(r[0]) for r in sweep] == [1.0, 100.0]


def test_chi_distribution_small(tmp_path):
    cfg = {"scenario": "chi-distribution", "n_traj": 3, "parameters": {"t_end": 0.05, "dt": 1e-4}}
    path = tmp_path / "c.json"
    path.write_text(json.dumps(cfg))
    assert main(["chi-distribution", "--config", str(path), "--out", str(tmp_path)]) == 0
    summary = json.loads((tmp_path / "chi_summary.json").read_text())
    assert set(summary) == {"mean", "stderr", "tail_below_1.45"}
    _, rows = _read_csv(tmp_path / "chi_hist.csv")
    assert sum(int(r[2]) for r in rows) == 3
