from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Set, Tuple

import numpy as np

from sensorimap.core.exceptions import BoundsError, InputError, ParameterError
from sensorimap.maps.models import GridSpec


@dataclass
class SomMap:
    """A rectangular lattice of nodes with one weight vector per node.

    Weights are stored row-major: node ``k`` sits at ``(k // cols, k % cols)``.
    """

    spec: GridSpec
    weights: np.ndarray

    def __post_init__(self) -> None:
        self.weights = np.asarray(self.weights, dtype=np.float64)
        expected = (self.spec.size, self.spec.input_dim)
        if self.weights.shape != expected:
            raise InputError(f"weights shape {self.weights.shape} does not match grid {expected}")
        if not np.all(np.isfinite(self.weights)):
            raise InputError("weights contain non-finite values")

    @property
    def positions(self) -> np.ndarray:
        return grid_positions(self.spec)

    def copy(self) -> "SomMap":
        return SomMap(spec=self.spec, weights=self.weights.copy())


def new_map(spec: GridSpec, seed: int) -> SomMap:
    """Weights drawn i.i.d. uniform over [0, 1]^input_dim."""

    rng = np.random.default_rng(seed)
    return SomMap(spec=spec, weights=rng.random((spec.size, spec.input_dim)))


def node_to_rc(index: int, spec: GridSpec) -> Tuple[int, int]:
    _check_index(index, spec)
    return index // spec.cols, index % spec.cols


def rc_to_node(row: int, col: int, spec: GridSpec) -> int:
    if not (0 <= row < spec.rows and 0 <= col < spec.cols):
        raise BoundsError(f"cell ({row}, {col}) outside {spec.label} grid")
    return row * spec.cols + col


def grid_positions(spec: GridSpec) -> np.ndarray:
    rows, cols = np.divmod(np.arange(spec.size), spec.cols)
    return np.stack([rows, cols], axis=1).astype(np.float64)


def grid_distance_sq(a: int, b: int, spec: GridSpec) -> float:
    ra, ca = node_to_rc(a, spec)
    rb, cb = node_to_rc(b, spec)
    return float((ra - rb) ** 2 + (ca - cb) ** 2)


def grid_distances_sq(center: int, spec: GridSpec) -> np.ndarray:
    """Squared lattice distance from ``center`` to every node."""

    r, c = node_to_rc(center, spec)
    pos = grid_positions(spec)
    return (pos[:, 0] - r) ** 2 + (pos[:, 1] - c) ** 2


def neighbors_within(center: int, radius: float, spec: GridSpec) -> Set[int]:
    if radius < 0:
        raise ParameterError(f"radius must be >= 0, got {radius}")
    d2 = grid_distances_sq(center, spec)
    return {int(k) for k in np.flatnonzero(d2 <= radius * radius)}


def ring_offsets(radius: float) -> List[Tuple[int, int]]:
    """Lattice offsets within ``radius``, excluding the origin."""

    reach = int(math.floor(radius))
    return [
        (dr, dc)
        for dr in range(-reach, reach + 1)
        for dc in range(-reach, reach + 1)
        if (dr, dc) != (0, 0) and dr * dr + dc * dc <= radius * radius
    ]


def neighbor_table(spec: GridSpec, radius: float) -> List[np.ndarray]:
    """For each node, the indices of the other nodes within ``radius``."""

    offsets = ring_offsets(radius)
    table: List[np.ndarray] = []
    for k in range(spec.size):
        r, c = divmod(k, spec.cols)
        table.append(
            np.array(
                [
                    (r + dr) * spec.cols + (c + dc)
                    for dr, dc in offsets
                    if 0 <= r + dr < spec.rows and 0 <= c + dc < spec.cols
                ],
                dtype=np.intp,
            )
        )
    return table


def boundary_mask(spec: GridSpec) -> np.ndarray:
    pos = grid_positions(spec)
    return (pos[:, 0] == 0) | (pos[:, 0] == spec.rows - 1) | (pos[:, 1] == 0) | (pos[:, 1] == spec.cols - 1)


def _check_index(index: int, spec: GridSpec) -> None:
    if not 0 <= index < spec.size:
        raise BoundsError(f"node {index} outside [0, {spec.size})")
