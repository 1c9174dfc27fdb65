import math

import numpy as np
import pytest

from sensorimap.arm.kinematics import BabbleSet
from sensorimap.core.exceptions import InputError, StateError
from sensorimap.harness.evaluation import DimensionError, ErrorReport, NodeErrorGrid, boundary_gap, evaluate
from sensorimap.harness.export import (
    export_heatmap,
    export_report,
    export_trace,
    load_report,
    read_grid_csv,
    write_grid_csv,
)
from sensorimap.learning.bridge import AssociativeBridge
from sensorimap.learning.model import SensorimotorModel
from sensorimap.maps.models import TraceCheckpoint, TrainingTrace


def test_exact_model_has_no_error(exact, arm):
    model, samples = exact
    report = evaluate(model, arm, samples)
    for dim in (report.x_mm, report.y_mm, report.theta1_deg, report.theta2_deg):
        assert dim.max < 1e-9
        assert dim.max >= dim.mean >= 0
    assert report.test_size == 9
    assert report.skipped_forward == report.skipped_inverse == 0
    assert report.motor_grid.counts == [1] * 9


def test_node_grid_agrees_with_report_means(exact, arm):
    model, samples = exact
    shifted = model.copy()
    shifted.sensory.weights[4] += 0.01
    report = evaluate(shifted, arm, samples)
    assert report.motor_grid.weighted_mean() == pytest.approx(report.forward_mean_norm_mm, abs=1e-9)
    assert report.sensory_grid.weighted_mean() == pytest.approx(report.inverse_mean_norm_deg, abs=1e-9)
    assert report.x_mm.max > 0


def test_untrained_links_are_skipped(exact, arm):
    model, samples = exact
    strengths = np.eye(9)
    strengths[0, 0] = 0.0
    partial = SensorimotorModel(
        motor=model.motor, sensory=model.sensory, bridge=AssociativeBridge(strengths=strengths), normalizer=model.normalizer
    )
    report = evaluate(partial, arm, samples)
    assert report.skipped_forward == 1
    assert report.skipped_inverse == 1
    assert report.motor_grid.values[0] is None


def test_untrained_bridge_is_a_state_error(exact, arm):
    model, samples = exact
    empty = SensorimotorModel(
        motor=model.motor, sensory=model.sensory, bridge=AssociativeBridge.zeros(9, 9), normalizer=model.normalizer
    )
    with pytest.raises(StateError):
        evaluate(empty, arm, samples)


def test_empty_test_set(exact, arm):
    model, samples = exact
    none = BabbleSet(
        joints=np.empty((0, 2)),
        positions=np.empty((0, 2)),
        joints_norm=np.empty((0, 2)),
        positions_norm=np.empty((0, 2)),
        normalizer=samples.normalizer,
    )
    with pytest.raises(InputError):
        evaluate(model, arm, none)


def test_grid_csv_format(tmp_path):
    grid = NodeErrorGrid(rows=2, cols=2, values=[0.0, 1.0, 2.0, 3.0], counts=[1, 1, 1, 1])
    path = write_grid_csv(grid, tmp_path / "grid.csv")
    assert path.read_text() == "0,1\n2,3\n"


def test_unvisited_nodes_are_empty_cells(tmp_path):
    grid = NodeErrorGrid(rows=2, cols=2, values=[0.5, None, 2.0, 3.0], counts=[2, 0, 1, 1])
    path = write_grid_csv(grid, tmp_path / "grid.csv")
    assert path.read_text() == "0.5,\n2,3\n"
    np.testing.assert_array_equal(read_grid_csv(path), grid.as_array())


def test_heatmap_from_report(tmp_path, exact, arm):
    model, samples = exact
    report = evaluate(model, arm, samples)
    motor = read_grid_csv(export_heatmap(report, tmp_path / "motor.csv"))
    sensory = read_grid_csv(export_heatmap(report, tmp_path / "sensory.csv", side="sensory"))
    assert motor.shape == sensory.shape == (3, 3)


def test_report_json(tmp_path, exact, arm):
    model, samples = exact
    report = evaluate(model, arm, samples)
    assert load_report(export_report(report, tmp_path / "report.json")) == report


def test_trace_csv(tmp_path):
    trace = TrainingTrace()
    trace.record(TraceCheckpoint(iteration=0, sigma=2.0, alpha=0.1, distortion=3.0, quantization_error=0.5))
    trace.record(TraceCheckpoint(iteration=10, sigma=1.5, alpha=0.08, distortion=2.0, quantization_error=0.25))
    lines = export_trace(trace, tmp_path / "trace.csv").read_text().splitlines()
    assert lines[0] == "iteration,zeta,quantization_error,sigma,alpha"
    assert lines[2] == "10,2,0.25,1.5,0.080000000000000002"


def test_boundary_gap():
    values = [2.0] * 9
    values[4] = 1.0
    assert boundary_gap(NodeErrorGrid(rows=3, cols=3, values=values, counts=[1] * 9)) == pytest.approx(1.0)
    unvisited = [2.0] * 4 + [None] + [2.0] * 4
    assert math.isnan(boundary_gap(NodeErrorGrid(rows=3, cols=3, values=unvisited, counts=[1] * 4 + [0] + [1] * 4)))


def test_table_row():
    dims = [DimensionError(mean=m, max=x) for m, x in [(1.15, 11.7), (1.26, 15.0), (0.31, 2.25), (0.44, 5.36)]]
    grid = NodeErrorGrid(rows=2, cols=2, values=[None] * 4, counts=[0] * 4)
    report = ErrorReport(
        grid="2x2",
        test_size=1,
        x_mm=dims[0],
        y_mm=dims[1],
        theta1_deg=dims[2],
        theta2_deg=dims[3],
        forward_mean_norm_mm=0.0,
        inverse_mean_norm_deg=0.0,
        motor_grid=grid,
        sensory_grid=grid,
    )
    assert report.table_row() == "1.15(11.7) 1.26(15) 0.31(2.25) 0.44(5.36)"
