import json

from sensorimap.cli import main
from sensorimap.harness.snapshot import save_snapshot


SMALL = ["--grid", "4", "--iters", "200", "--set", "train_samples=300", "--set", "bridge_samples=300", "--set", "test_samples=50"]


def test_snapshot_command(tmp_path, exact, capsys):
    path = save_snapshot(exact[0], tmp_path / "snap.json")
    assert main(["snapshot", str(path)]) == 0
    assert '"motor_grid": "3x3"' in capsys.readouterr().out


def test_config_errors_exit_nonzero_with_stage(tmp_path, capsys):
    assert main(["scenario", "--set", "bogus=1", "--out", str(tmp_path)]) == 2
    err = capsys.readouterr().err
    assert "stage=config" in err
    assert "bogus" in err


def test_missing_snapshot_is_reported(tmp_path, capsys):
    assert main(["snapshot", str(tmp_path / "none.json")]) == 2
    assert "stage=snapshot" in capsys.readouterr().err


def test_babble_command(tmp_path):
    out = tmp_path / "babble.csv"
    assert main(["babble", "--n", "5", "--seed", "3", "--out", str(out)]) == 0
    assert len(out.read_text().splitlines()) == 6


def test_train_bridge_eval_heatmap(tmp_path, capsys):
    snap = tmp_path / "snap.json"
    report = tmp_path / "report.json"
    heatmap = tmp_path / "heatmap.csv"
    assert main(["train", *SMALL, "--variant", "som", "--out", str(snap)]) == 0
    assert (tmp_path / "snap_trace_motor.csv").exists()
    assert main(["bridge", *SMALL, "--snapshot", str(snap)]) == 0
    assert main(["eval", *SMALL, "--snapshot", str(snap), "--out", str(report)]) == 0
    assert main(["heatmap", "--report", str(report), "--side", "sensory", "--out", str(heatmap)]) == 0
    assert json.loads(report.read_text())["test_size"] == 50
    assert len(heatmap.read_text().splitlines()) == 4


def test_train_rejects_several_grid_sizes(tmp_path, capsys):
    out = tmp_path / "snap.json"
    assert main(["train", "--grid", "4,5", "--iters", "10", "--out", str(out)]) == 2
    err = capsys.readouterr().err
    assert "stage=config" in err
    assert "single grid size" in err
    assert not out.exists()
