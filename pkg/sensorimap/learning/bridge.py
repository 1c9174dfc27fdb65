from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Literal, Optional, Sequence, Tuple, Union

import numpy as np

from sensorimap.arm.kinematics import BabbleSet
from sensorimap.core.exceptions import InputError, ParameterError, UntrainedLinkError
from sensorimap.core.logging import get_logger
from sensorimap.maps.lattice import SomMap, grid_distances_sq, neighbor_table
from sensorimap.maps.models import GridSpec, TrainingSchedule
from sensorimap.maps.quality import as_data
from sensorimap.maps.som import as_vector, decayed, find_bmu


logger = get_logger(__name__)

Schedule = Callable[[int], float]
QueryMode = Literal["argmax", "interpolate"]
PairedSamples = Union[BabbleSet, Sequence[Tuple[Sequence[float], Sequence[float]]]]


@dataclass
class AssociativeBridge:
    """Connection strengths between motor nodes (rows) and sensory nodes (columns)."""

    strengths: np.ndarray
    eta: float = 0.3
    beta: float = 1.0

    def __post_init__(self) -> None:
        self.strengths = np.asarray(self.strengths, dtype=np.float64)
        if self.strengths.ndim != 2:
            raise InputError(f"strengths must be a matrix, got shape {self.strengths.shape}")
        if not self.eta > 0 or not self.beta > 0:
            raise ParameterError(f"eta and beta must be > 0, got eta={self.eta} beta={self.beta}")
        if not np.all(np.isfinite(self.strengths)):
            raise InputError("strengths contain non-finite values")

    @classmethod
    def zeros(cls, motor_nodes: int, sensory_nodes: int, eta: float = 0.3, beta: float = 1.0) -> "AssociativeBridge":
        return cls(strengths=np.zeros((motor_nodes, sensory_nodes)), eta=eta, beta=beta)

    @property
    def motor_nodes(self) -> int:
        return int(self.strengths.shape[0])

    @property
    def sensory_nodes(self) -> int:
        return int(self.strengths.shape[1])

    def copy(self) -> "AssociativeBridge":
        return AssociativeBridge(strengths=self.strengths.copy(), eta=self.eta, beta=self.beta)

    def check_maps(self, motor_map: SomMap, sensory_map: SomMap) -> None:
        if (self.motor_nodes, self.sensory_nodes) != (motor_map.spec.size, sensory_map.spec.size):
            raise InputError(
                f"bridge {self.motor_nodes}x{self.sensory_nodes} does not match maps "
                f"{motor_map.spec.size}x{sensory_map.spec.size}"
            )


def activities(map_: SomMap, x: object, sigma: float) -> np.ndarray:
    """Gaussian activity of every node for input ``x``; the BMU is the most active."""

    if not sigma > 0:
        raise ParameterError(f"sigma must be > 0, got {sigma}")
    vec = as_vector(map_, x)
    diff = map_.weights - vec
    return np.exp(-np.einsum("md,md->m", diff, diff) / (sigma * sigma))


def oja_step(
    bridge: AssociativeBridge,
    motor_act: np.ndarray,
    sensory_act: np.ndarray,
    eta: Optional[float] = None,
    beta: Optional[float] = None,
) -> AssociativeBridge:
    """c_ij += eta * (a_i * a_j - beta * c_ij * a_j^2), in place.

    Columns whose sensory activity is exactly zero are left untouched; the update
    is zero there anyway. The step is capped per column at 1 / (beta * a_j^2) so
    every update stays a contraction toward a_i / (beta * a_j).
    """

    a_m = np.asarray(motor_act, dtype=np.float64)
    a_s = np.asarray(sensory_act, dtype=np.float64)
    if a_m.shape != (bridge.motor_nodes,) or a_s.shape != (bridge.sensory_nodes,):
        raise InputError(
            f"activity shapes {a_m.shape}/{a_s.shape} do not match bridge "
            f"{bridge.motor_nodes}x{bridge.sensory_nodes}"
        )
    eta = bridge.eta if eta is None else eta
    beta = bridge.beta if beta is None else beta

    cols = np.flatnonzero(a_s)
    if cols.size == 0:
        return bridge
    a_j = a_s[cols]
    with np.errstate(divide="ignore"):
        step = np.minimum(eta, 1.0 / (beta * a_j * a_j))
    c = bridge.strengths[:, cols]
    c += step * (np.outer(a_m, a_j) - beta * c * (a_j * a_j))
    bridge.strengths[:, cols] = c
    return bridge


def _decode(row: np.ndarray, target: SomMap, sigma_q: float, mode: QueryMode) -> np.ndarray:
    best = int(np.argmax(row))
    if mode == "argmax":
        return target.weights[best].copy()
    if mode != "interpolate":
        raise ParameterError(f"unknown query mode {mode!r}")
    if sigma_q < 0:
        raise ParameterError(f"sigma_q must be >= 0, got {sigma_q}")
    near = np.flatnonzero(grid_distances_sq(best, target.spec) <= sigma_q * sigma_q)
    weights = np.clip(row[near], 0.0, None)
    total = weights.sum()
    if total <= 0:
        return target.weights[best].copy()
    return (weights[:, None] * target.weights[near]).sum(axis=0) / total


def query_forward(
    bridge: AssociativeBridge,
    motor_map: SomMap,
    sensory_map: SomMap,
    joint_input: object,
    sigma_q: float = 1.0,
    mode: QueryMode = "argmax",
) -> np.ndarray:
    """Predict the normalized task-space position for a normalized joint input."""

    bridge.check_maps(motor_map, sensory_map)
    node = find_bmu(motor_map, joint_input)
    row = bridge.strengths[node]
    if not np.any(row):
        raise UntrainedLinkError(node, "motor")
    return _decode(row, sensory_map, sigma_q, mode)


def query_inverse(
    bridge: AssociativeBridge,
    motor_map: SomMap,
    sensory_map: SomMap,
    task_input: object,
    sigma_q: float = 1.0,
    mode: QueryMode = "argmax",
) -> np.ndarray:
    """Predict the normalized joint input that reaches a normalized task-space position."""

    bridge.check_maps(motor_map, sensory_map)
    node = find_bmu(sensory_map, task_input)
    column = bridge.strengths[:, node]
    if not np.any(column):
        raise UntrainedLinkError(node, "sensory")
    return _decode(column, motor_map, sigma_q, mode)


def constant(value: float) -> Schedule:
    return lambda _t: value


def bridge_sigma_schedule(sched: TrainingSchedule, spec: GridSpec) -> Schedule:
    """Activity width for bridge training, in weight-space units.

    Continues the map clock after ``total_iters`` and is floored at one lattice
    unit, i.e. 1 / (side - 1) of the normalized input range.
    """

    unit = 1.0 / (spec.side - 1)

    def sigma(t: int) -> float:
        return max(decayed(sched.sigma_init, sched.total_iters + t, sched.time_constant), 1.0) * unit

    return sigma


def _pairs(paired_samples: PairedSamples) -> Tuple[np.ndarray, np.ndarray]:
    if isinstance(paired_samples, BabbleSet):
        return paired_samples.joints_norm, paired_samples.positions_norm
    pairs = list(paired_samples)
    if not pairs:
        raise InputError("bridge training needs at least one (joint, task) pair")
    return (
        np.asarray([p[0] for p in pairs], dtype=np.float64),
        np.asarray([p[1] for p in pairs], dtype=np.float64),
    )


def train_bridge(
    bridge: AssociativeBridge,
    motor_map: SomMap,
    sensory_map: SomMap,
    paired_samples: PairedSamples,
    sigma_schedule: Schedule,
    eta_schedule: Schedule,
    beta_schedule: Schedule,
    activity_floor: float = 1e-8,
) -> AssociativeBridge:
    """Present each (joint, task) pair once, in order, applying one Oja step per pair.

    Activities below ``activity_floor`` are zeroed; ``0`` keeps the dense update.
    """

    bridge.check_maps(motor_map, sensory_map)
    motor_x, sensory_x = _pairs(paired_samples)
    motor_x = as_data(motor_map, motor_x)
    sensory_x = as_data(sensory_map, sensory_x)
    if motor_x.shape[0] != sensory_x.shape[0]:
        raise InputError(f"{motor_x.shape[0]} joint samples but {sensory_x.shape[0]} task samples")

    trained = bridge.copy()
    for t in range(motor_x.shape[0]):
        sigma = sigma_schedule(t)
        a_m = activities(motor_map, motor_x[t], sigma)
        a_s = activities(sensory_map, sensory_x[t], sigma)
        if activity_floor > 0:
            a_m[a_m < activity_floor] = 0.0
            a_s[a_s < activity_floor] = 0.0
        oja_step(trained, a_m, a_s, eta=eta_schedule(t), beta=beta_schedule(t))

    logger.info(
        "bridge trained samples=%d nonzero=%d max=%.6g untrained_motor_rows=%d",
        motor_x.shape[0],
        int(np.count_nonzero(trained.strengths)),
        float(trained.strengths.max(initial=0.0)),
        int(np.count_nonzero(~trained.strengths.any(axis=1))),
    )
    return trained


def reciprocity_rate(
    bridge: AssociativeBridge,
    motor_map: SomMap,
    sensory_map: SomMap,
    joint_inputs: object,
    sigma_q: float = 1.0,
    mode: QueryMode = "argmax",
) -> float:
    """Fraction of inputs whose forward-then-inverse round trip lands within one
    lattice cell of the original motor BMU's weights."""

    joints = as_data(motor_map, joint_inputs)
    table = neighbor_table(motor_map.spec, 1.0)
    hits = 0
    for x in joints:
        node = find_bmu(motor_map, x)
        try:
            back = query_inverse(
                bridge,
                motor_map,
                sensory_map,
                query_forward(bridge, motor_map, sensory_map, x, sigma_q, mode),
                sigma_q,
                mode,
            )
        except UntrainedLinkError:
            continue
        w = motor_map.weights
        span = float(np.max(np.linalg.norm(w[table[node]] - w[node], axis=1)))
        if np.linalg.norm(back - w[node]) <= span:
            hits += 1
    return hits / joints.shape[0]
