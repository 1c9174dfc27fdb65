from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np

from sensorimap.core.exceptions import InputError, ParameterError
from sensorimap.core.logging import get_logger
from sensorimap.maps.lattice import SomMap, grid_distance_sq, grid_positions
from sensorimap.maps.models import GridSpec, TraceCheckpoint, TrainingSchedule, TrainingTrace
from sensorimap.maps.quality import as_data, distortion, quantization_error


logger = get_logger(__name__)

# (map, bmu, schedule time, sigma) -> extra neighborhood amplitude
AmplitudeFn = Callable[[SomMap, int, float, float], float]


def as_vector(map_: SomMap, x: object) -> np.ndarray:
    vec = np.asarray(x, dtype=np.float64)
    if vec.ndim != 1 or vec.shape[0] != map_.spec.input_dim:
        raise InputError(f"input of shape {vec.shape} does not match input_dim {map_.spec.input_dim}")
    if not np.all(np.isfinite(vec)):
        raise InputError("input contains non-finite values")
    return vec


def find_bmu(map_: SomMap, x: object) -> int:
    """Index of the node nearest to ``x``; ties go to the lowest index."""

    vec = as_vector(map_, x)
    diff = map_.weights - vec
    return int(np.argmin(np.einsum("md,md->m", diff, diff)))


def gaussian_neighborhood(j: int, bmu: int, sigma: float, spec: GridSpec) -> float:
    if not sigma > 0:
        raise ParameterError(f"sigma must be > 0, got {sigma}")
    return math.exp(-grid_distance_sq(j, bmu, spec) / (2.0 * sigma * sigma))


def decayed(init: float, t: float, time_constant: float) -> float:
    return init * math.exp(-t / time_constant)


@dataclass(frozen=True)
class DecaySchedule:
    """sigma(t) and alpha(t) on a clock that may start at ``offset``.

    ``pace`` schedule iterations elapse per training iteration; iteration
    labels still advance by one.
    """

    sigma_init: float
    alpha_init: float
    time_constant: float
    offset: int = 0
    pace: float = 1.0

    @classmethod
    def from_schedule(cls, sched: TrainingSchedule) -> "DecaySchedule":
        return cls(sigma_init=sched.sigma_init, alpha_init=sched.alpha_init, time_constant=sched.time_constant)

    def clock(self, t: int) -> int:
        return self.offset + t

    def elapsed(self, t: int) -> float:
        return self.offset + self.pace * t

    def sigma(self, t: int) -> float:
        return decayed(self.sigma_init, self.elapsed(t), self.time_constant)

    def alpha(self, t: int) -> float:
        return decayed(self.alpha_init, self.elapsed(t), self.time_constant)


def apply_update(
    map_: SomMap,
    positions: np.ndarray,
    bmu: int,
    x: np.ndarray,
    alpha: float,
    sigma: float,
    cutoff: float,
    amplitude: float = 0.0,
) -> None:
    """In-place neighborhood update around ``bmu``.

    Each node moves by a factor f = alpha * (h + min(amplitude * h, 1)), f <= 1,
    toward ``x``; with ``amplitude == 0`` this is the plain Kohonen update.
    """

    d2 = np.einsum("md,md->m", positions - positions[bmu], positions - positions[bmu])
    if cutoff > 0:
        if amplitude > 0:
            radius_sq = sigma * sigma * (cutoff * cutoff + 2.0 * math.log1p(amplitude))
        else:
            radius_sq = (cutoff * sigma) ** 2
        idx = np.flatnonzero(d2 <= radius_sq)
    else:
        idx = np.arange(d2.shape[0])

    h = np.exp(-d2[idx] / (2.0 * sigma * sigma))
    if amplitude > 0:
        factor = alpha * (h + np.minimum(amplitude * h, 1.0))
    else:
        factor = alpha * h
    factor = np.minimum(factor, 1.0)[:, None]

    old = map_.weights[idx]
    moved = (1.0 - factor) * old + factor * x
    map_.weights[idx] = np.clip(moved, np.minimum(old, x), np.maximum(old, x))


def som_step(map_: SomMap, x: object, t: int, sched: TrainingSchedule) -> SomMap:
    """One Kohonen update at iteration ``t``; mutates and returns ``map_``."""

    if not 0 <= t < max(sched.total_iters, 1):
        raise ParameterError(f"iteration {t} outside [0, {sched.total_iters})")
    vec = as_vector(map_, x)
    decay = DecaySchedule.from_schedule(sched)
    bmu = find_bmu(map_, vec)
    apply_update(map_, grid_positions(map_.spec), bmu, vec, decay.alpha(t), decay.sigma(t), sched.neighborhood_cutoff)
    return map_


def _checkpoint(map_: SomMap, subset: np.ndarray, decay: DecaySchedule, t: int) -> TraceCheckpoint:
    return TraceCheckpoint(
        iteration=decay.clock(t),
        sigma=decay.sigma(t),
        alpha=decay.alpha(t),
        distortion=distortion(map_, subset),
        quantization_error=quantization_error(map_, subset),
    )


def run_training(
    map_: SomMap,
    data: object,
    iters: int,
    decay: DecaySchedule,
    seed: int,
    cutoff: float = 3.0,
    trace_window: int = 500,
    checkpoint_every: Optional[int] = None,
    amplitude: Optional[AmplitudeFn] = None,
) -> Tuple[SomMap, TrainingTrace]:
    """Shared training loop for SOM, VDSOM and re-adaptation runs.

    Samples are drawn uniformly with replacement. Trace checkpoints are measured
    on a fixed subset of at most ``trace_window`` samples drawn from a separate
    stream, so tracing never changes the training stream.
    """

    arr = as_data(map_, data)
    trained = map_.copy()
    trace = TrainingTrace()
    if iters <= 0:
        return trained, trace

    draw_seq, trace_seq = np.random.SeedSequence(seed).spawn(2)
    draws = np.random.default_rng(draw_seq).integers(0, arr.shape[0], size=iters)
    subset_size = min(trace_window, arr.shape[0])
    subset = arr[np.sort(np.random.default_rng(trace_seq).choice(arr.shape[0], size=subset_size, replace=False))]
    every = checkpoint_every or max(1, iters // 100)
    positions = grid_positions(trained.spec)

    trace.record(_checkpoint(trained, subset, decay, 0))
    for t in range(iters):
        x = arr[draws[t]]
        diff = trained.weights - x
        bmu = int(np.argmin(np.einsum("md,md->m", diff, diff)))
        sigma = decay.sigma(t)
        amp = amplitude(trained, bmu, decay.elapsed(t), sigma) if amplitude is not None else 0.0
        apply_update(trained, positions, bmu, x, decay.alpha(t), sigma, cutoff, amp)

        done = t + 1
        if done % every == 0 or done == iters:
            cp = _checkpoint(trained, subset, decay, done)
            trace.record(cp)
            logger.debug(
                "iter=%d sigma=%.4f alpha=%.5f zeta=%.6g qe=%.6g",
                cp.iteration,
                cp.sigma,
                cp.alpha,
                cp.distortion,
                cp.quantization_error,
            )

    first, last = trace.checkpoints[0], trace.final
    logger.info(
        "trained grid=%s iters=%d offset=%d pace=%.3g qe_start=%.6g qe_end=%.6g zeta_start=%.6g zeta_end=%.6g",
        trained.spec.label,
        iters,
        decay.offset,
        decay.pace,
        first.quantization_error,
        last.quantization_error,
        first.distortion,
        last.distortion,
    )
    return trained, trace


def train_som(map_: SomMap, data: object, sched: TrainingSchedule) -> Tuple[SomMap, TrainingTrace]:
    sched.validate_for(map_.spec)
    return run_training(
        map_,
        data,
        sched.total_iters,
        DecaySchedule.from_schedule(sched),
        seed=sched.seed,
        cutoff=sched.neighborhood_cutoff,
        trace_window=sched.trace_window,
        checkpoint_every=sched.checkpoint_every,
    )
