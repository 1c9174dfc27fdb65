from __future__ import annotations

import math
from typing import List, Optional

import numpy as np
from pydantic import BaseModel, Field

from sensorimap.arm.kinematics import ArmModel, BabbleSet, forward_kinematics
from sensorimap.core.exceptions import InputError, StateError, UntrainedLinkError
from sensorimap.core.logging import get_logger
from sensorimap.learning.bridge import QueryMode
from sensorimap.learning.model import SensorimotorModel
from sensorimap.maps.lattice import boundary_mask
from sensorimap.maps.models import GridSpec
from sensorimap.maps.quality import find_bmus


logger = get_logger(__name__)


class DimensionError(BaseModel):
    mean: float = Field(..., ge=0.0)
    max: float = Field(..., ge=0.0)


class NodeErrorGrid(BaseModel):
    """Mean error per node over the test points for which it was the BMU.

    ``values`` is row-major; None marks nodes that were never chosen as BMU.
    """

    rows: int
    cols: int
    values: List[Optional[float]]
    counts: List[int]

    def as_array(self) -> np.ndarray:
        return np.array([np.nan if v is None else v for v in self.values], dtype=np.float64).reshape(
            self.rows, self.cols
        )

    def weighted_mean(self) -> float:
        counts = np.asarray(self.counts, dtype=np.float64)
        values = np.nan_to_num(self.as_array().ravel())
        return float((values * counts).sum() / counts.sum())


class ErrorReport(BaseModel):
    grid: str
    test_size: int
    skipped_forward: int = 0
    skipped_inverse: int = 0
    x_mm: DimensionError
    y_mm: DimensionError
    theta1_deg: DimensionError
    theta2_deg: DimensionError
    forward_mean_norm_mm: float
    inverse_mean_norm_deg: float
    motor_grid: NodeErrorGrid
    sensory_grid: NodeErrorGrid

    def table_row(self) -> str:
        """Mean(Max) cells in X, Y, theta1, theta2 order."""

        cells = [self.x_mm, self.y_mm, self.theta1_deg, self.theta2_deg]
        return " ".join(f"{c.mean:.3g}({c.max:.3g})" for c in cells)


def _accumulate(spec: GridSpec, nodes: np.ndarray, errors: np.ndarray) -> NodeErrorGrid:
    counts = np.bincount(nodes, minlength=spec.size)
    sums = np.bincount(nodes, weights=errors, minlength=spec.size)
    values = [None if n == 0 else float(s / n) for s, n in zip(sums, counts)]
    return NodeErrorGrid(rows=spec.rows, cols=spec.cols, values=values, counts=[int(n) for n in counts])


def _dimension(errors: np.ndarray) -> DimensionError:
    return DimensionError(mean=float(np.mean(errors)), max=float(np.max(errors)))


def evaluate(
    model: SensorimotorModel,
    arm: ArmModel,
    test_samples: BabbleSet,
    sigma_q: float = 1.0,
    mode: QueryMode = "argmax",
) -> ErrorReport:
    """Forward errors in mm and inverse errors in degrees over a test set.

    Ground truth for forward queries is FK on ``arm``; for inverse queries it is
    the joint pair that generated each test position. Queries that reach an
    untrained link are counted as skipped.
    """

    n = len(test_samples)
    if n == 0:
        raise InputError("evaluation needs a non-empty test set")
    truth = forward_kinematics(arm, test_samples.joints)

    fwd_idx: List[int] = []
    fwd_pred: List[np.ndarray] = []
    inv_idx: List[int] = []
    inv_pred: List[np.ndarray] = []
    for k in range(n):
        try:
            fwd_pred.append(model.forward(test_samples.joints[k], sigma_q, mode))
            fwd_idx.append(k)
        except UntrainedLinkError:
            pass
        try:
            inv_pred.append(model.inverse(truth[k], sigma_q, mode))
            inv_idx.append(k)
        except UntrainedLinkError:
            pass
    if not fwd_idx or not inv_idx:
        raise StateError("no test query reached a trained link; is the bridge trained?")

    fwd = np.asarray(fwd_idx)
    inv = np.asarray(inv_idx)
    pos_err = np.abs(np.asarray(fwd_pred) - truth[fwd])
    ang_err = np.degrees(np.abs(np.asarray(inv_pred) - test_samples.joints[inv]))
    pos_norm = np.linalg.norm(pos_err, axis=1)
    ang_norm = np.linalg.norm(ang_err, axis=1)

    motor_nodes = find_bmus(model.motor, model.normalizer.normalize_joints(test_samples.joints[fwd]))
    sensory_nodes = find_bmus(model.sensory, model.normalizer.normalize_positions(truth[inv]))

    report = ErrorReport(
        grid=model.motor.spec.label,
        test_size=n,
        skipped_forward=n - fwd.size,
        skipped_inverse=n - inv.size,
        x_mm=_dimension(pos_err[:, 0]),
        y_mm=_dimension(pos_err[:, 1]),
        theta1_deg=_dimension(ang_err[:, 0]),
        theta2_deg=_dimension(ang_err[:, 1]),
        forward_mean_norm_mm=float(np.mean(pos_norm)),
        inverse_mean_norm_deg=float(np.mean(ang_norm)),
        motor_grid=_accumulate(model.motor.spec, motor_nodes, pos_norm),
        sensory_grid=_accumulate(model.sensory.spec, sensory_nodes, ang_norm),
    )
    logger.info(
        "evaluated grid=%s n=%d skipped_fwd=%d skipped_inv=%d errors=%s",
        report.grid,
        n,
        report.skipped_forward,
        report.skipped_inverse,
        report.table_row(),
    )
    return report


def boundary_gap(grid: NodeErrorGrid) -> float:
    """Mean error over visited boundary nodes minus the mean over visited interior nodes."""

    values = grid.as_array().ravel()
    mask = boundary_mask(GridSpec(rows=grid.rows, cols=grid.cols, input_dim=1))
    boundary = values[mask & ~np.isnan(values)]
    interior = values[~mask & ~np.isnan(values)]
    if boundary.size == 0 or interior.size == 0:
        return math.nan
    return float(boundary.mean() - interior.mean())
