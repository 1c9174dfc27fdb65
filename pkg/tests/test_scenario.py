import json

import numpy as np
import pytest

from sensorimap.core.exceptions import StageError
from sensorimap.harness.experiment import ExperimentConfig
from sensorimap.harness.scenario import FAILURE_MARKER, run_scenario


def _config(**overrides):
    base = dict(
        grid_sizes=[5],
        total_iters=300,
        train_samples=400,
        test_samples=100,
        bridge_samples=400,
        window=50,
    )
    base.update(overrides)
    return ExperimentConfig(**base)


def test_baseline_is_reproducible(tmp_path):
    cfg = _config(scenario="baseline_som")
    run_scenario(cfg, tmp_path / "a")
    run_scenario(cfg, tmp_path / "b")
    for name in ("report_before.json", "heatmap_motor_before.csv", "trace_sensory.csv", "snapshot_before.json"):
        assert (tmp_path / "a" / "grid_5x5" / name).read_bytes() == (tmp_path / "b" / "grid_5x5" / name).read_bytes()
    summary = json.loads((tmp_path / "a" / "summary.json").read_text())
    assert summary["scenario"] == "baseline_som"
    assert "5x5" in summary["grids"]
    assert (tmp_path / "a" / "config.env").exists()
    assert not (tmp_path / "a" / FAILURE_MARKER).exists()


def test_stretch_scenario_writes_adaptation_artifacts(tmp_path):
    results = run_scenario(_config(scenario="stretch", compare_scratch=True), tmp_path)
    adaptation = results["5x5"]["adaptation"]
    assert adaptation["triggered"]
    assert adaptation["zeta_trigger"] > adaptation["threshold"]
    out = tmp_path / "grid_5x5"
    for name in ("report_stale.json", "report_after.json", "report_scratch.json", "distortion_window.csv", "snapshot_after.json"):
        assert (out / name).exists()
    phases = {line.split(",")[1] for line in (out / "distortion_window.csv").read_text().splitlines()[1:]}
    assert phases == {"before", "changed", "adapted"}


def test_failed_stage_leaves_a_marker(tmp_path):
    with pytest.raises(StageError) as info:
        run_scenario(_config(scenario="vdsom", sigma_init=50.0), tmp_path)
    assert info.value.stage == "train"
    assert "stage=train" in (tmp_path / FAILURE_MARKER).read_text()
    assert (tmp_path / "grid_5x5" / "babble_train.csv").exists()


def test_unchanged_arm_does_not_trigger(tmp_path):
    cfg = _config(scenario="stretch", stretch_factor=1.0, window=100)
    adaptation = run_scenario(cfg, tmp_path)["5x5"]["adaptation"]
    assert adaptation["triggered"] is False
    assert adaptation["zeta_trigger"] is None
    assert adaptation["threshold"] == pytest.approx(1.3 * adaptation["zeta_baseline"])
    assert adaptation["zeta_before"] <= adaptation["zeta_baseline"]
    out = tmp_path / "grid_5x5"
    assert (out / "distortion_window.csv").exists()
    assert not (out / "report_after.json").exists()


def test_undefined_boundary_gap_is_written_as_null(tmp_path):
    # every node of a 2x2 grid is on the boundary, so there is no interior to compare
    run_scenario(_config(scenario="baseline_som", grid_sizes=[2]), tmp_path)
    text = (tmp_path / "grid_2x2" / "summary.json").read_text()
    assert "NaN" not in text
    assert json.loads(text)["before"]["motor_boundary_gap"] is None


def _mean_forward(summary):
    return (summary["x_mm"]["mean"], summary["y_mm"]["mean"])


@pytest.fixture(scope="module")
def paired_runs(tmp_path_factory):
    root = tmp_path_factory.mktemp("paired")
    runs = []
    for seed in range(10):
        som = run_scenario(ExperimentConfig(scenario="baseline_som", seed=seed), root / f"som{seed}")["70x70"]
        vdsom = run_scenario(ExperimentConfig(scenario="vdsom", seed=seed), root / f"vdsom{seed}")["70x70"]
        runs.append((som["before"], vdsom["before"]))
    return runs


@pytest.mark.slow
def test_vdsom_beats_som_on_forward_error(paired_runs):
    wins = sum(all(v < s for v, s in zip(_mean_forward(vdsom), _mean_forward(som))) for som, vdsom in paired_runs)
    assert wins >= 9
    som_means = np.mean([_mean_forward(som) for som, _ in paired_runs], axis=0)
    vdsom_means = np.mean([_mean_forward(vdsom) for _, vdsom in paired_runs], axis=0)
    assert np.max(som_means / vdsom_means) >= 1.5


@pytest.mark.slow
def test_vdsom_error_magnitudes(paired_runs):
    _, vdsom = paired_runs[0]
    assert max(_mean_forward(vdsom)) <= 3.0
    assert vdsom["theta1_deg"]["mean"] <= 1.5
    assert vdsom["theta2_deg"]["mean"] <= 1.5


@pytest.mark.slow
def test_vdsom_narrows_the_boundary_error_gap(paired_runs):
    som, vdsom = paired_runs[0]
    for side in ("motor_boundary_gap", "sensory_boundary_gap"):
        assert som[side] > 0
        assert vdsom[side] <= 0.7 * som[side]


@pytest.mark.slow
def test_errors_shrink_with_grid_size(tmp_path):
    results = run_scenario(ExperimentConfig(scenario="vdsom", grid_sizes=[30, 50, 70]), tmp_path)
    timing = [json.loads((tmp_path / f"grid_{n}x{n}" / "timing.json").read_text())["train_maps_s"] for n in (30, 50, 70)]
    for dim in ("x_mm", "y_mm", "theta1_deg", "theta2_deg"):
        means = [results[f"{n}x{n}"]["before"][dim]["mean"] for n in (30, 50, 70)]
        assert means[0] > means[1] > means[2]
    assert timing[0] < timing[1] < timing[2]


@pytest.mark.slow
@pytest.mark.parametrize("scenario", ["stretch", "shorten"])
def test_adaptation_recovers_distortion(tmp_path, scenario):
    cfg = ExperimentConfig(scenario=scenario, grid_sizes=[30], total_iters=30_000, compare_scratch=True)
    adaptation = run_scenario(cfg, tmp_path)["30x30"]["adaptation"]
    assert adaptation["triggered"]
    assert not adaptation["motor_relearned"]
    assert adaptation["zeta_after"] < 1.5 * adaptation["zeta_before"]
    for after, scratch in zip(_mean_forward(adaptation["after"]), _mean_forward(adaptation["scratch"])):
        assert after <= 2.0 * scratch
