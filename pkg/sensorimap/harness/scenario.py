from __future__ import annotations

import json
import math
import time
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional, Tuple, Union

import numpy as np

from sensorimap.arm.kinematics import ArmModel, BabbleSet, Normalizer, babble, perturb, write_babble_csv
from sensorimap.core.exceptions import StageError
from sensorimap.core.logging import get_logger
from sensorimap.harness.evaluation import ErrorReport, boundary_gap, evaluate
from sensorimap.harness.experiment import ExperimentConfig, dump_experiment_config
from sensorimap.harness.export import export_distortion_series, export_heatmap, export_report, export_trace
from sensorimap.harness.snapshot import save_snapshot
from sensorimap.learning.adaptation import (
    AdaptationController,
    DistortionMonitor,
    detect_change,
    run_readaptation,
    window_readings,
)
from sensorimap.learning.bridge import AssociativeBridge, bridge_sigma_schedule, constant, train_bridge
from sensorimap.learning.model import SensorimotorModel
from sensorimap.maps.lattice import SomMap, new_map
from sensorimap.maps.models import GridSpec, TrainingTrace
from sensorimap.maps.quality import boundary_spacing
from sensorimap.maps.som import train_som
from sensorimap.maps.vdsom import train_vdsom


logger = get_logger(__name__)

FAILURE_MARKER = "FAILED"
MONITOR_CHUNK = 50

# Offsets from the experiment seed for each random stream of a run.
SEED_TRAIN_BABBLE = 0
SEED_TEST_BABBLE = 1
SEED_CALIBRATION = 2
SEED_BRIDGE_BABBLE = 3
SEED_POST_CHANGE = 4
SEED_POST_TEST = 5
SEED_POST_MONITOR = 6
SEED_MOTOR_INIT = 10
SEED_SENSORY_INIT = 11
SEED_MOTOR_TRAIN = 20
SEED_SENSORY_TRAIN = 21
SEED_RELEARN = 40
SEED_SCRATCH = 50


@dataclass
class TrainedSystem:
    model: SensorimotorModel
    motor_trace: TrainingTrace
    sensory_trace: TrainingTrace
    map_seconds: float
    bridge_seconds: float


@contextmanager
def stage(name: str) -> Iterator[None]:
    """Label any failure inside the block with the stage name."""

    logger.info("stage=%s start", name)
    try:
        yield
    except StageError:
        raise
    except Exception as e:  # noqa: BLE001
        logger.exception("stage=%s failed", name)
        raise StageError(name, e) from e
    logger.info("stage=%s done", name)


def train_maps(
    config: ExperimentConfig, spec: GridSpec, train_set: BabbleSet, seed: int
) -> Tuple[SomMap, TrainingTrace, SomMap, TrainingTrace]:
    """Train the motor map on joint angles and the sensory map on hand positions."""

    motor_sched = config.schedule(spec, seed + SEED_MOTOR_TRAIN)
    sensory_sched = config.schedule(spec, seed + SEED_SENSORY_TRAIN)
    motor0 = new_map(spec, seed + SEED_MOTOR_INIT)
    sensory0 = new_map(spec, seed + SEED_SENSORY_INIT)
    if config.map_variant == "vdsom":
        motor, motor_trace = train_vdsom(motor0, train_set.joints_norm, motor_sched, config.density())
        sensory, sensory_trace = train_vdsom(sensory0, train_set.positions_norm, sensory_sched, config.density())
    else:
        motor, motor_trace = train_som(motor0, train_set.joints_norm, motor_sched)
        sensory, sensory_trace = train_som(sensory0, train_set.positions_norm, sensory_sched)
    return motor, motor_trace, sensory, sensory_trace


def fresh_bridge(config: ExperimentConfig, motor: SomMap, sensory: SomMap, bridge_set: BabbleSet) -> AssociativeBridge:
    """Train a zero bridge between two frozen maps."""

    spec = motor.spec
    return train_bridge(
        AssociativeBridge.zeros(spec.size, spec.size, eta=config.eta_init, beta=1.0),
        motor,
        sensory,
        bridge_set,
        sigma_schedule=bridge_sigma_schedule(config.schedule(spec, config.seed + SEED_SENSORY_TRAIN), spec),
        eta_schedule=constant(config.eta_init),
        beta_schedule=constant(1.0),
        activity_floor=config.activity_floor,
    )


def train_system(
    config: ExperimentConfig,
    spec: GridSpec,
    train_set: BabbleSet,
    bridge_set: BabbleSet,
    seed_offset: int = 0,
    total_iters: Optional[int] = None,
) -> TrainedSystem:
    """Train both maps (SOM or VDSOM per config) and then the bridge with frozen maps."""

    if total_iters is not None:
        config = config.model_copy(update={"total_iters": total_iters})
    started = time.perf_counter()
    motor, motor_trace, sensory, sensory_trace = train_maps(config, spec, train_set, config.seed + seed_offset)
    map_seconds = time.perf_counter() - started

    started = time.perf_counter()
    bridge = fresh_bridge(config, motor, sensory, bridge_set)
    bridge_seconds = time.perf_counter() - started

    model = SensorimotorModel(motor=motor, sensory=sensory, bridge=bridge, normalizer=train_set.normalizer)
    return TrainedSystem(model, motor_trace, sensory_trace, map_seconds, bridge_seconds)


def _finite(value: float) -> Optional[float]:
    """JSON has no NaN; undefined values are written as null."""

    return value if math.isfinite(value) else None


def _report_summary(report: ErrorReport) -> Dict[str, Any]:
    return {
        "x_mm": report.x_mm.model_dump(),
        "y_mm": report.y_mm.model_dump(),
        "theta1_deg": report.theta1_deg.model_dump(),
        "theta2_deg": report.theta2_deg.model_dump(),
        "motor_boundary_gap": _finite(boundary_gap(report.motor_grid)),
        "sensory_boundary_gap": _finite(boundary_gap(report.sensory_grid)),
        "skipped_forward": report.skipped_forward,
        "skipped_inverse": report.skipped_inverse,
    }


def _write_json(payload: Dict[str, Any], path: Path) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True, allow_nan=False) + "\n", encoding="utf-8")


def _monitor(
    monitor: DistortionMonitor,
    model: SensorimotorModel,
    positions_norm: np.ndarray,
    phase: str,
    series: List[Tuple[int, str, float]],
    seen: int,
    controller: Optional[AdaptationController] = None,
) -> Tuple[int, Optional[float]]:
    """Feed samples in chunks, logging the windowed distortion.

    With a controller, stops at the first chunk whose distortion exceeds the
    threshold and returns that distortion.
    """

    for start in range(0, positions_norm.shape[0], MONITOR_CHUNK):
        monitor.push(positions_norm[start : start + MONITOR_CHUNK])
        seen += min(MONITOR_CHUNK, positions_norm.shape[0] - start)
        zeta = monitor.zeta(model.sensory)
        series.append((seen, phase, zeta))
        if controller is not None and detect_change(controller, zeta):
            return seen, zeta
    return seen, None


def _run_grid(config: ExperimentConfig, spec: GridSpec, out: Path) -> Dict[str, Any]:
    arm = config.arm()
    timing: Dict[str, float] = {}
    summary: Dict[str, Any] = {"grid": spec.label, "variant": config.map_variant, "scenario": config.scenario}

    with stage("babble"):
        normalizer = Normalizer.from_arm(arm)
        train_set = babble(arm, config.train_samples, config.seed + SEED_TRAIN_BABBLE, normalizer)
        test_set = babble(arm, config.test_samples, config.effective_test_seed, normalizer)
        bridge_set = babble(arm, config.bridge_samples, config.seed + SEED_BRIDGE_BABBLE, normalizer)
        write_babble_csv(train_set, out / "babble_train.csv")

    with stage("train"):
        system = train_system(config, spec, train_set, bridge_set)
        timing["train_maps_s"] = system.map_seconds
        timing["train_bridge_s"] = system.bridge_seconds
        model = system.model

    with stage("evaluate"):
        report = evaluate(model, arm, test_set, config.query_radius, config.query_mode)

    with stage("export"):
        export_report(report, out / "report_before.json")
        export_heatmap(report, out / "heatmap_motor_before.csv", "motor")
        export_heatmap(report, out / "heatmap_sensory_before.csv", "sensory")
        export_trace(system.motor_trace, out / "trace_motor.csv")
        export_trace(system.sensory_trace, out / "trace_sensory.csv")
        save_snapshot(model, out / "snapshot_before.json")
        summary["before"] = _report_summary(report)
        summary["boundary_spacing"] = {
            "motor": boundary_spacing(model.motor),
            "sensory": boundary_spacing(model.sensory),
        }

    if config.scenario in ("stretch", "shorten"):
        summary["adaptation"] = _run_change(config, spec, arm, model, system, normalizer, out, timing)

    _write_json(summary, out / "summary.json")
    _write_json(timing, out / "timing.json")
    return summary


def _run_change(
    config: ExperimentConfig,
    spec: GridSpec,
    arm: ArmModel,
    model: SensorimotorModel,
    system: TrainedSystem,
    normalizer: Normalizer,
    out: Path,
    timing: Dict[str, float],
) -> Dict[str, Any]:
    factor = config.stretch_factor if config.scenario == "stretch" else config.shorten_factor
    result: Dict[str, Any] = {"kind": config.scenario, "link": config.perturb_link, "factor": factor}
    density = config.density() if config.map_variant == "vdsom" else None

    with stage("perturb"):
        changed = perturb(arm, config.scenario, config.perturb_link, factor)  # type: ignore[arg-type]
        post_stream = babble(changed, config.train_samples, config.seed + SEED_POST_CHANGE, normalizer)
        post_test = babble(changed, config.test_samples, config.seed + SEED_POST_TEST, normalizer)
        stale = evaluate(model, changed, post_test, config.query_radius, config.query_mode)
        export_report(stale, out / "report_stale.json")
        result["stale"] = _report_summary(stale)

    with stage("calibrate"):
        settings = config.adaptation()
        calibration = babble(arm, config.calibration_windows * config.window, config.seed + SEED_CALIBRATION, normalizer)
        sensory_readings = window_readings(
            model.sensory, calibration.positions_norm, config.window, settings.metric, MONITOR_CHUNK
        )
        motor_readings = window_readings(model.motor, calibration.joints_norm, config.window, settings.metric, MONITOR_CHUNK)
        sensory_ctrl = AdaptationController.from_training(
            system.sensory_trace,
            config.schedule(spec, config.seed + SEED_SENSORY_TRAIN),
            map_radius=spec.side / 2.0,
            settings=settings,
            baseline=float(sensory_readings.max()),
        )
        motor_ctrl = AdaptationController.from_training(
            system.motor_trace,
            config.schedule(spec, config.seed + SEED_MOTOR_TRAIN),
            map_radius=spec.side / 2.0,
            settings=settings,
            baseline=float(motor_readings.max()),
        )

    with stage("monitor"):
        monitor = DistortionMonitor(config.window, settings.metric)
        series: List[Tuple[int, str, float]] = []
        seen, _ = _monitor(monitor, model, calibration.positions_norm, "before", series, 0)
        seen, zeta_trigger = _monitor(monitor, model, post_stream.positions_norm, "changed", series, seen, sensory_ctrl)
        result.update(
            {
                "zeta_before": float(sensory_readings.mean()),
                "zeta_baseline": float(sensory_readings.max()),
                "threshold": sensory_ctrl.threshold,
                "triggered": zeta_trigger is not None,
                "zeta_trigger": zeta_trigger,
            }
        )

    if zeta_trigger is None:
        logger.warning("distortion never exceeded threshold=%.6g; skipping re-adaptation", sensory_ctrl.threshold)
        export_distortion_series(series, out / "distortion_window.csv")
        return result

    with stage("readapt"):
        started = time.perf_counter()
        adapted = run_readaptation(
            model,
            post_stream,
            sensory_ctrl,
            motor_ctrl,
            density=density,
            activity_floor=config.activity_floor,
            seed=config.seed + SEED_RELEARN,
        )
        timing["readapt_s"] = time.perf_counter() - started
        monitor_tail = babble(changed, config.window, config.seed + SEED_POST_MONITOR, normalizer)
        _monitor(monitor, adapted.model, monitor_tail.positions_norm, "adapted", series, seen)
        result.update(
            {
                "tau": sensory_ctrl.tau,
                "max_radius": sensory_ctrl.resolution.max_radius if sensory_ctrl.resolution else False,
                "tau_motor": motor_ctrl.tau,
                "motor_relearned": adapted.motor_relearned,
                "zeta_after": series[-1][2],
                "relearn_iters": sensory_ctrl.relearn_iters,
            }
        )

    with stage("re_evaluate"):
        after = evaluate(adapted.model, changed, post_test, config.query_radius, config.query_mode)
        export_report(after, out / "report_after.json")
        export_heatmap(after, out / "heatmap_motor_after.csv", "motor")
        export_heatmap(after, out / "heatmap_sensory_after.csv", "sensory")
        export_trace(adapted.sensory_trace, out / "trace_sensory_relearn.csv")
        export_trace(adapted.motor_trace, out / "trace_motor_relearn.csv")
        export_distortion_series(series, out / "distortion_window.csv")
        save_snapshot(adapted.model, out / "snapshot_after.json")
        result["after"] = _report_summary(after)

    if config.compare_scratch:
        with stage("scratch"):
            bridge_set = babble(changed, config.bridge_samples, config.seed + SEED_SCRATCH + 1, normalizer)
            scratch = train_system(
                config,
                spec,
                post_stream,
                bridge_set,
                seed_offset=SEED_SCRATCH,
                total_iters=sensory_ctrl.relearn_iters,
            )
            scratch_report = evaluate(scratch.model, changed, post_test, config.query_radius, config.query_mode)
            export_report(scratch_report, out / "report_scratch.json")
            result["scratch"] = _report_summary(scratch_report)

    return result


def run_scenario(config: ExperimentConfig, output_dir: Optional[Union[str, Path]] = None) -> Dict[str, Any]:
    """Run the configured scenario for every grid size and write artifacts.

    On failure a FAILED marker naming the stage is written next to the partial
    artifacts and the StageError propagates.
    """

    root = Path(output_dir or config.output_dir)
    root.mkdir(parents=True, exist_ok=True)
    dump_experiment_config(config, root / "config.env")
    (root / FAILURE_MARKER).unlink(missing_ok=True)

    results: Dict[str, Any] = {}
    try:
        for spec in config.grids():
            out = root / f"grid_{spec.label}"
            out.mkdir(exist_ok=True)
            logger.info("scenario=%s grid=%s variant=%s out=%s", config.scenario, spec.label, config.map_variant, out)
            results[spec.label] = _run_grid(config, spec, out)
    except StageError as e:
        (root / FAILURE_MARKER).write_text(f"stage={e.stage}\nerror={e.cause}\n", encoding="utf-8")
        raise

    _write_json({"scenario": config.scenario, "grids": results}, root / "summary.json")
    return results
