from __future__ import annotations

import numpy as np

from sensorimap.core.exceptions import InputError
from sensorimap.maps.lattice import SomMap, boundary_mask, neighbor_table


def as_data(map_: SomMap, data: object) -> np.ndarray:
    arr = np.asarray(data, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2 or arr.shape[0] == 0:
        raise InputError("data must be a non-empty sequence of vectors")
    if arr.shape[1] != map_.spec.input_dim:
        raise InputError(f"data dimension {arr.shape[1]} does not match map input_dim {map_.spec.input_dim}")
    if not np.all(np.isfinite(arr)):
        raise InputError("data contains non-finite values")
    return arr


def squared_distances(weights: np.ndarray, data: np.ndarray) -> np.ndarray:
    """(n, M) matrix of squared Euclidean distances from each datum to each node."""

    diff = data[:, None, :] - weights[None, :, :]
    return np.einsum("nmd,nmd->nm", diff, diff)


def find_bmus(map_: SomMap, data: object, chunk: int = 512) -> np.ndarray:
    arr = as_data(map_, data)
    out = np.empty(arr.shape[0], dtype=np.intp)
    for start in range(0, arr.shape[0], chunk):
        block = arr[start : start + chunk]
        out[start : start + chunk] = np.argmin(squared_distances(map_.weights, block), axis=1)
    return out


def distortion(map_: SomMap, data: object) -> float:
    """Mean over data of the summed squared distance to every node.

    (1/n) * sum_x sum_i ||x - w_i||^2, evaluated in closed form.
    """

    arr = as_data(map_, data)
    w = map_.weights
    m = w.shape[0]
    total = (
        m * np.mean(np.einsum("nd,nd->n", arr, arr))
        - 2.0 * float(np.mean(arr, axis=0) @ w.sum(axis=0))
        + float(np.einsum("md,md->", w, w))
    )
    return max(float(total), 0.0)


def quantization_error(map_: SomMap, data: object, chunk: int = 512) -> float:
    """Mean squared distance from each datum to its BMU."""

    arr = as_data(map_, data)
    acc = 0.0
    for start in range(0, arr.shape[0], chunk):
        block = arr[start : start + chunk]
        acc += float(np.min(squared_distances(map_.weights, block), axis=1).sum())
    return acc / arr.shape[0]


def _mean_neighbor_spacing(map_: SomMap) -> np.ndarray:
    table = neighbor_table(map_.spec, 1.0)
    w = map_.weights
    return np.array(
        [float(np.mean(np.linalg.norm(w[nbrs] - w[k], axis=1))) for k, nbrs in enumerate(table)]
    )


def boundary_spacing(map_: SomMap) -> float:
    """Mean over boundary nodes of the mean weight distance to their 4-connected neighbors."""

    return float(np.mean(_mean_neighbor_spacing(map_)[boundary_mask(map_.spec)]))


def interior_spacing(map_: SomMap) -> float:
    mask = ~boundary_mask(map_.spec)
    if not mask.any():
        raise InputError(f"grid {map_.spec.label} has no interior nodes")
    return float(np.mean(_mean_neighbor_spacing(map_)[mask]))
