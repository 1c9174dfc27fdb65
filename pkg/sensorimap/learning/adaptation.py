from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Deque, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from sensorimap.arm.kinematics import BabbleSet
from sensorimap.core.exceptions import ConfigurationError, InputError, ParameterError, StateError
from sensorimap.core.logging import get_logger
from sensorimap.learning.bridge import train_bridge
from sensorimap.learning.model import SensorimotorModel
from sensorimap.maps.lattice import SomMap
from sensorimap.maps.models import DensityParams, TraceMetric, TrainingSchedule, TrainingTrace
from sensorimap.maps.quality import as_data, distortion, quantization_error
from sensorimap.maps.som import DecaySchedule, run_training
from sensorimap.maps.vdsom import make_amplitude


logger = get_logger(__name__)

__all__ = [
    "AdaptationController",
    "AdaptationSettings",
    "DistortionMonitor",
    "ReadaptationResult",
    "TauResolution",
    "detect_change",
    "distortion",
    "measure",
    "relearn_schedules",
    "resolve_tau",
    "run_readaptation",
    "window_readings",
]


def measure(map_: SomMap, data: object, metric: TraceMetric) -> float:
    return distortion(map_, data) if metric == "summed" else quantization_error(map_, data)


class AdaptationSettings(BaseModel):
    """Change detection and relearning knobs shared by both maps."""

    model_config = ConfigDict(frozen=True)

    threshold_ratio: float = 1.3
    relearn_fraction: float = 0.2
    beta_init: float = 1.0
    eta_init: float = 0.5
    metric: TraceMetric = "summed"

    @model_validator(mode="after")
    def _check(self) -> "AdaptationSettings":
        if not self.threshold_ratio > 0:
            raise ConfigurationError(f"threshold_ratio must be > 0, got {self.threshold_ratio}")
        if not 0 < self.relearn_fraction:
            raise ConfigurationError(f"relearn_fraction must be > 0, got {self.relearn_fraction}")
        if not self.beta_init > 0 or not self.eta_init > 0:
            raise ConfigurationError("relearn beta_init and eta_init must be > 0")
        return self


@dataclass(frozen=True)
class TauResolution:
    tau: int
    max_radius: bool = False


def resolve_tau(history: TrainingTrace, zeta_now: float, metric: TraceMetric = "summed") -> TauResolution:
    """Checkpoint iteration whose recorded distortion is nearest ``zeta_now``.

    Only checkpoints from the largest recorded distortion onward are candidates;
    ties go to the earlier checkpoint. A distortion above every recorded one
    restarts the clock at 0 with the radius reset to the full map radius.
    """

    if not history.checkpoints:
        raise StateError("cannot resolve tau from an empty training trace")
    values = np.array([cp.metric(metric) for cp in history.checkpoints])
    peak = int(np.argmax(values))
    if zeta_now > values[peak]:
        return TauResolution(tau=0, max_radius=True)
    nearest = peak + int(np.argmin(np.abs(values[peak:] - zeta_now)))
    return TauResolution(tau=history.checkpoints[nearest].iteration)


@dataclass
class AdaptationController:
    """Change detection and relearning schedules for one map.

    ``schedule`` is the schedule the map was originally trained with; its sigma_init,
    alpha_init and time constant T carry over into the relearning schedules.
    """

    threshold: float
    history: TrainingTrace
    schedule: TrainingSchedule
    map_radius: float
    beta_init: float = 1.0
    eta_init: float = 0.5
    relearn_iters: int = 1
    metric: TraceMetric = "summed"
    resolution: Optional[TauResolution] = None

    def __post_init__(self) -> None:
        if self.threshold < 0:
            raise ParameterError(f"threshold must be >= 0, got {self.threshold}")
        if not self.beta_init > 0 or not self.eta_init > 0:
            raise ParameterError("beta_init and eta_init must be > 0")
        if self.relearn_iters < 1:
            raise ParameterError(f"relearn_iters must be >= 1, got {self.relearn_iters}")

    @classmethod
    def from_training(
        cls,
        history: TrainingTrace,
        schedule: TrainingSchedule,
        map_radius: float,
        settings: Optional[AdaptationSettings] = None,
        baseline: Optional[float] = None,
    ) -> "AdaptationController":
        """Threshold relative to a baseline distortion; relearn budget a fraction
        of the original one.

        ``baseline`` defaults to the final recorded training distortion. Pass the
        monitor's own reading on held-out data so both sides measure the same way.
        """

        settings = settings or AdaptationSettings()
        reference = history.final.metric(settings.metric) if baseline is None else baseline
        return cls(
            threshold=settings.threshold_ratio * reference,
            history=history,
            schedule=schedule,
            map_radius=map_radius,
            beta_init=settings.beta_init,
            eta_init=settings.eta_init,
            relearn_iters=max(1, int(round(settings.relearn_fraction * schedule.total_iters))),
            metric=settings.metric,
        )

    @property
    def tau(self) -> Optional[int]:
        return None if self.resolution is None else self.resolution.tau

    def trigger(self, zeta_now: float) -> TauResolution:
        self.resolution = resolve_tau(self.history, zeta_now, self.metric)
        logger.info(
            "adaptation triggered zeta=%.6g threshold=%.6g tau=%d max_radius=%s",
            zeta_now,
            self.threshold,
            self.resolution.tau,
            self.resolution.max_radius,
        )
        return self.resolution

    def decay(self) -> DecaySchedule:
        """sigma_r(t) / alpha_r(t) for map relearning.

        The clock resumes at tau; when the rest of the original schedule is longer
        than the relearn budget it is replayed faster so it still ends there.
        """

        if self.resolution is None:
            raise StateError("tau is unresolved; call trigger() first")
        total = self.schedule.total_iters
        if self.resolution.max_radius:
            return DecaySchedule(
                self.map_radius,
                self.schedule.alpha_init,
                self.schedule.time_constant,
                pace=max(1.0, total / self.relearn_iters),
            )
        return DecaySchedule(
            self.schedule.sigma_init,
            self.schedule.alpha_init,
            self.schedule.time_constant,
            offset=self.resolution.tau,
            pace=max(1.0, (total - self.resolution.tau) / self.relearn_iters),
        )


def detect_change(controller: AdaptationController, zeta: float) -> bool:
    return zeta > controller.threshold


def relearn_schedules(controller: AdaptationController, t: int) -> Tuple[float, float, float]:
    """(sigma_r, beta, eta) at relearning iteration ``t``."""

    sigma_r = controller.decay().sigma(t)
    T = controller.schedule.time_constant
    boost = math.exp((T - t) / T)
    return sigma_r, controller.beta_init * boost, controller.eta_init * boost


class DistortionMonitor:
    """Distortion of a map over a sliding window of the most recent samples."""

    def __init__(self, window: int = 500, metric: TraceMetric = "summed"):
        if window < 1:
            raise ParameterError(f"window must be >= 1, got {window}")
        self.metric = metric
        self.size = window
        self._samples: Deque[np.ndarray] = deque(maxlen=window)

    def push(self, samples: object) -> None:
        arr = np.atleast_2d(np.asarray(samples, dtype=np.float64))
        self._samples.extend(arr)

    def __len__(self) -> int:
        return len(self._samples)

    @property
    def full(self) -> bool:
        return len(self._samples) == self.size

    def window(self) -> np.ndarray:
        if not self._samples:
            raise InputError("distortion window is empty")
        return np.stack(self._samples)

    def zeta(self, map_: SomMap) -> float:
        return measure(map_, self.window(), self.metric)


def window_readings(map_: SomMap, data: object, window: int, metric: TraceMetric, chunk: int = 50) -> np.ndarray:
    """Distortion of every full sliding window over ``data``, advancing by ``chunk``."""

    arr = as_data(map_, data)
    if arr.shape[0] < window:
        raise InputError(f"need at least {window} samples for one window, got {arr.shape[0]}")
    monitor = DistortionMonitor(window, metric)
    readings = []
    for start in range(0, arr.shape[0], chunk):
        monitor.push(arr[start : start + chunk])
        if monitor.full:
            readings.append(monitor.zeta(map_))
    return np.array(readings)


@dataclass
class ReadaptationResult:
    model: SensorimotorModel
    motor_trace: TrainingTrace
    sensory_trace: TrainingTrace
    final_zeta: float
    motor_relearned: bool = True


def _relearn_map(
    map_: SomMap,
    data: np.ndarray,
    controller: AdaptationController,
    density: Optional[DensityParams],
    seed: int,
) -> Tuple[SomMap, TrainingTrace]:
    decay = controller.decay()
    amplitude = make_amplitude(map_.spec, density, decay.time_constant) if density is not None else None
    return run_training(
        map_,
        data,
        controller.relearn_iters,
        decay,
        seed=seed,
        cutoff=controller.schedule.neighborhood_cutoff,
        trace_window=controller.schedule.trace_window,
        amplitude=amplitude,
    )


def _recent(controller: AdaptationController, data: np.ndarray) -> np.ndarray:
    return data[-controller.schedule.trace_window :]


def run_readaptation(
    model: SensorimotorModel,
    new_data: BabbleSet,
    controller: AdaptationController,
    motor_controller: AdaptationController,
    density: Optional[DensityParams] = None,
    activity_floor: float = 1e-8,
    seed: int = 0,
) -> ReadaptationResult:
    """Resume map training on post-change data, then rewire the bridge.

    ``controller`` monitors the sensory map, ``motor_controller`` the motor map.
    An unresolved controller resolves tau from the most recent window of
    ``new_data``. The sensory map always relearns; the motor map relearns only
    when its own detector fires (or its tau was already resolved). The bridge is
    warm-started and retrained over ``new_data`` with the boosted beta(t), eta(t)
    schedules. ``density`` selects VDSOM relearning; None relearns as a plain SOM.
    """

    if controller.resolution is None:
        controller.trigger(measure(model.sensory, _recent(controller, new_data.positions_norm), controller.metric))
    sensory, sensory_trace = _relearn_map(model.sensory, new_data.positions_norm, controller, density, seed)

    motor_relearned = motor_controller.resolution is not None
    if not motor_relearned:
        zeta_motor = measure(model.motor, _recent(motor_controller, new_data.joints_norm), motor_controller.metric)
        if detect_change(motor_controller, zeta_motor):
            motor_controller.trigger(zeta_motor)
            motor_relearned = True
        else:
            logger.info("motor map unchanged zeta=%.6g threshold=%.6g", zeta_motor, motor_controller.threshold)
    if motor_relearned:
        motor, motor_trace = _relearn_map(model.motor, new_data.joints_norm, motor_controller, density, seed + 1)
    else:
        motor, motor_trace = model.motor.copy(), TrainingTrace()

    unit = 1.0 / (sensory.spec.side - 1)
    relearn_end = controller.relearn_iters
    bridge = train_bridge(
        model.bridge,
        motor,
        sensory,
        new_data,
        sigma_schedule=lambda t: max(controller.decay().sigma(relearn_end + t), 1.0) * unit,
        eta_schedule=lambda t: relearn_schedules(controller, t)[2],
        beta_schedule=lambda t: relearn_schedules(controller, t)[1],
        activity_floor=activity_floor,
    )
    adapted = SensorimotorModel(motor=motor, sensory=sensory, bridge=bridge, normalizer=model.normalizer)
    final_zeta = measure(sensory, _recent(controller, new_data.positions_norm), controller.metric)
    logger.info(
        "readaptation done tau_sensory=%s tau_motor=%s final_zeta=%.6g threshold=%.6g",
        controller.tau,
        motor_controller.tau,
        final_zeta,
        controller.threshold,
    )
    return ReadaptationResult(
        model=adapted,
        motor_trace=motor_trace,
        sensory_trace=sensory_trace,
        final_zeta=final_zeta,
        motor_relearned=motor_relearned,
    )
