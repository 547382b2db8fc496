import csv
import json

import numpy as np
import pytest

from coopraman.cli import main
from coopraman.photonics import PhotonMatrix
from coopraman.scenario import SystemConfig, save_scenario


@pytest.fixture
def small_scenario(tmp_path):
    path = tmp_path / "scenario.json"
    save_scenario(SystemConfig(N_s=10), path)
    return path


def test_run_writes_outputs(tmp_path, small_scenario, capsys):
    out = tmp_path / "run"
    rc = main(["run", "--scenario", str(small_scenario), "--out", str(out),
               "--dump-photons", str(tmp_path / "n.csv"), "--dump-scenes", str(tmp_path / "v.json")])
    assert rc == 0
    summary = json.loads(capsys.readouterr().out)
    assert set(summary) == {"centralized", "distributed"}
    report = json.loads((out / "report.json").read_text())
    assert "mse" in report["centralized"]
    assert (out / "spectrum_centralized.csv").exists()
    assert PhotonMatrix.from_csv(tmp_path / "n.csv").shape == (10, 148)
    assert json.loads((tmp_path / "v.json").read_text())["n_beams"] == 1480


def test_reconstruct_round_trip(tmp_path, small_scenario, capsys):
    main(["run", "--scenario", str(small_scenario), "--out", str(tmp_path / "a"),
          "--dump-photons", str(tmp_path / "n.csv")])
    first = json.loads((tmp_path / "a" / "report.json").read_text())
    capsys.readouterr()
    rc = main(["reconstruct", "--scenario", str(small_scenario), "--photons", str(tmp_path / "n.csv"),
               "--out", str(tmp_path / "b")])
    assert rc == 0
    second = json.loads((tmp_path / "b" / "report.json").read_text())
    assert second["centralized"]["mse"] == first["centralized"]["mse"]


def test_allocate_csv(tmp_path):
    out = tmp_path / "alloc.csv"
    assert main(["allocate", "--out", str(out)]) == 0
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 148
    P = np.array([float(r["P_W"]) for r in rows])
    assert P.sum() == pytest.approx(0.01 / 30)


def test_capacity_stdout(capsys):
    assert main(["capacity", "--samples", "2"]) == 0
    io = capsys.readouterr()
    lines = io.out.strip().splitlines()
    assert lines[0] == "shift_cm1,capacity_nats_per_s,se" and len(lines) == 149
    assert json.loads(io.err)["total_nats_per_s"] > 0


def test_sweep_relative_paths_and_determinism(tmp_path, small_scenario):
    spec = {"parameter": "upsilon", "values": [1.0, 25.0], "trials": 4,
            "scenario": small_scenario.name, "out": "sweep.csv"}
    (tmp_path / "spec.json").write_text(json.dumps(spec))
    assert main(["sweep", "--spec", str(tmp_path / "spec.json"), "--out", str(tmp_path / "a.csv")]) == 0
    assert main(["sweep", "--spec", str(tmp_path / "spec.json"), "--out", str(tmp_path / "b.csv"),
                 "--jobs", "2"]) == 0
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    man = json.loads((tmp_path / "a.manifest.json").read_text())
    assert man["base_config"]["N_s"] == 10


def test_config_error_is_json(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"N_s": -1}))
    assert main(["allocate", "--scenario", str(bad)]) == 2
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "ConfigError" and "N_s" in err["message"]


def test_missing_file_is_json(capsys):
    assert main(["run", "--scenario", "/nonexistent.json"]) == 2
    assert json.loads(capsys.readouterr().err)["error"] == "FileNotFoundError"


def test_photon_shape_mismatch(tmp_path, capsys):
    PhotonMatrix(np.ones((3, 3), int)).to_csv(tmp_path / "n.csv")
    assert main(["reconstruct", "--photons", str(tmp_path / "n.csv"), "--out", str(tmp_path)]) == 2
    assert "photon matrix" in json.loads(capsys.readouterr().err)["message"]
