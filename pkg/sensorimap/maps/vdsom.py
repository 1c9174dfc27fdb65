from __future__ import annotations

import math
from typing import Optional, Sequence, Tuple

import numpy as np

from sensorimap.core.exceptions import BoundsError, ParameterError
from sensorimap.maps.lattice import SomMap, neighbor_table, neighbors_within
from sensorimap.maps.models import DensityParams, GridSpec, TrainingSchedule, TrainingTrace
from sensorimap.maps.som import AmplitudeFn, DecaySchedule, gaussian_neighborhood, run_training


def _rho(weights: np.ndarray, bmu: int, others: Sequence[int], floor: float, unit: float = 1.0) -> float:
    others = np.asarray(others, dtype=np.intp)
    if others.size == 0:
        return 1.0
    diff = (weights[others] - weights[bmu]) / unit
    return max(math.exp(-float(np.einsum("kd,kd->", diff, diff))), floor)


def density_coefficient(map_: SomMap, bmu: int, params: DensityParams) -> float:
    """Node density coefficient around ``bmu``, clamped below at ``rho_floor``.

    Large weight-space gaps to the lattice neighbors (sparse regions) drive it
    toward the floor; a tightly packed neighborhood gives 1. Distances are
    measured in ``params.distance_unit``.
    """

    if not 0 <= bmu < map_.spec.size:
        raise BoundsError(f"node {bmu} outside [0, {map_.spec.size})")
    ring = sorted(neighbors_within(bmu, params.local_radius, map_.spec) - {bmu})
    return _rho(map_.weights, bmu, ring, params.rho_floor, params.distance_unit(map_.spec))


def vdsom_amplitude(t: float, sigma: float, time_constant: float, rho: float, exponent: int = 4) -> float:
    if not sigma > 0 or not time_constant > 0:
        raise ParameterError(f"sigma and T must be > 0, got sigma={sigma} T={time_constant}")
    if not 0 < rho <= 1:
        raise ParameterError(f"rho must be in (0, 1], got {rho}")
    if t < 0:
        raise ParameterError(f"iteration must be >= 0, got {t}")
    return (t / (rho * time_constant)) ** exponent * math.exp(-t / (sigma * sigma * time_constant))


def vdsom_neighborhood(
    j: int,
    bmu: int,
    t: float,
    sigma: float,
    time_constant: float,
    rho: float,
    spec: GridSpec,
) -> float:
    """Density amplitude times the spatial Gaussian, clamped at 1."""

    amplitude = vdsom_amplitude(t, sigma, time_constant, rho)
    return min(amplitude * gaussian_neighborhood(j, bmu, sigma, spec), 1.0)


def make_amplitude(spec: GridSpec, params: DensityParams, time_constant: float) -> Optional[AmplitudeFn]:
    """Amplitude callback for the training loop, or None when the term is disabled."""

    if not params.enabled:
        return None
    table = neighbor_table(spec, params.local_radius)
    unit = params.distance_unit(spec)

    def amplitude(map_: SomMap, bmu: int, t: int, sigma: float) -> float:
        rho = _rho(map_.weights, bmu, table[bmu], params.rho_floor, unit)
        return vdsom_amplitude(t, sigma, time_constant, rho, params.onset_exponent)

    return amplitude


def train_vdsom(
    map_: SomMap,
    data: object,
    sched: TrainingSchedule,
    params: DensityParams,
) -> Tuple[SomMap, TrainingTrace]:
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
        amplitude=make_amplitude(map_.spec, params, sched.time_constant),
    )
