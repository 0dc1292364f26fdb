import json
import subprocess
import sys

import pytest

from trackfuse.cli import main
from trackfuse.sim import save_scenario
from tests.scenarios import two_subject_scenario


@pytest.fixture()
def scenario_file(tmp_path):
    path = tmp_path / "scenario.json"
    save_scenario(path, two_subject_scenario(seed=11, duration=6.0))
    return path


def test_simulate_writes_streams(tmp_path, scenario_file, capsys):
    out = tmp_path / "sim"
    assert main(["simulate", "--scenario", str(scenario_file), "--out", str(out)]) == 0
    for name in ("radar_frames.jsonl", "detections.jsonl", "ground_truth.jsonl", "scenario.json"):
        assert (out / name).exists()
    first = json.loads((out / "radar_frames.jsonl").read_text().splitlines()[0])
    assert first["index"] == 0 and "points" in first


def test_run_and_eval(tmp_path, scenario_file, capsys):
    run_dir = tmp_path / "run"
    assert main(["run", "--scenario", str(scenario_file), "--out", str(run_dir)]) == 0
    assert (run_dir / "fused.json").exists()
    assert (run_dir / "per_frame.csv").exists()

    assert main(["eval", "--run", str(run_dir)]) == 0
    assert (run_dir / "metrics.json").exists()
    assert (run_dir / "metrics.txt").exists()
    figures = list((run_dir / "figures").glob("*.png"))
    assert figures, "eval should render figures by default"
    metrics = json.loads((run_dir / "metrics.json").read_text())
    assert "association" in metrics and "clustering" in metrics


def test_run_seed_override_changes_output(tmp_path, scenario_file):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["run", "--scenario", str(scenario_file), "--out", str(a), "--seed", "1"]) == 0
    assert main(["run", "--scenario", str(scenario_file), "--out", str(b), "--seed", "2"]) == 0
    assert (a / "radar_frames.jsonl").read_text() != (b / "radar_frames.jsonl").read_text()


def test_run_with_replayed_detections(tmp_path, scenario_file):
    sim_dir = tmp_path / "sim"
    main(["simulate", "--scenario", str(scenario_file), "--out", str(sim_dir)])
    run_dir = tmp_path / "run"
    code = main(
        [
            "run",
            "--scenario",
            str(scenario_file),
            "--out",
            str(run_dir),
            "--detections",
            str(sim_dir / "detections.jsonl"),
        ]
    )
    assert code == 0
    assert (run_dir / "fused.json").exists()


def test_reid_bench_small_grid(tmp_path):
    out = tmp_path / "bench"
    code = main(
        [
            "reid-bench",
            "--subjects", "2",
            "--train-min", "0.5",
            "--window", "0", "3",
            "--seeds", "2",
            "--test-s", "20",
            "--out", str(out),
        ]
    )
    assert code == 0
    lines = (out / "reid_accuracy.csv").read_text().splitlines()
    assert lines[0] == "method,subjects,train_min,window_s,seeds,accuracy"
    assert len(lines) == 5  # header + 2 windows x 2 methods
    assert (out / "reid_accuracy.png").exists()


def test_oracle_check(capsys):
    assert main(["oracle-check"]) == 0
    out = capsys.readouterr().out
    assert out.count("[PASS]") == 4
    for name in ("assignment", "welm-forms", "ekf-jacobians", "dbscan"):
        assert name in out


def test_error_is_machine_readable_json(tmp_path, capsys):
    code = main(["run", "--scenario", str(tmp_path / "missing.json"), "--out", str(tmp_path / "x")])
    assert code != 0
    err = capsys.readouterr().err
    payload = json.loads(err)
    assert "error" in payload and "message" in payload


def test_console_entry_point(scenario_file, tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "trackfuse.cli", "simulate", "--scenario", str(scenario_file),
         "--out", str(tmp_path / "out")],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
