from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Literal, Optional, Tuple, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, model_validator

from sensorimap.core.exceptions import ConfigurationError, InputError, ParameterError
from sensorimap.core.logging import get_logger


logger = get_logger(__name__)

Bounds = Tuple[float, float]


class ArmModel(BaseModel):
    """Link lengths in mm and joint ranges in radians.

    theta1 is measured from the horizontal axis, theta2 relative to the first link.
    """

    model_config = ConfigDict(frozen=True)

    link1: float = 150.0
    link2: float = 150.0
    theta1_range: Bounds = (0.0, math.pi / 2)
    theta2_range: Bounds = (0.0, math.pi * 5 / 6)

    @model_validator(mode="after")
    def _check(self) -> "ArmModel":
        for name, length in (("link1", self.link1), ("link2", self.link2)):
            if not (math.isfinite(length) and length > 0):
                raise ConfigurationError(f"{name} must be positive and finite, got {length}")
        for name, (lo, hi) in (("theta1_range", self.theta1_range), ("theta2_range", self.theta2_range)):
            if not hi > lo:
                raise ConfigurationError(f"{name} is empty: [{lo}, {hi}]")
        return self

    @property
    def reach(self) -> float:
        return self.link1 + self.link2


def forward_kinematics(arm: ArmModel, joints: object) -> np.ndarray:
    """End-effector position(s) in mm for joint pair(s) in radians.

    Accepts a single (theta1, theta2) pair or an (n, 2) array.
    """

    q = np.asarray(joints, dtype=np.float64)
    if q.shape[-1] != 2:
        raise InputError(f"joints must have 2 components, got shape {q.shape}")
    t1 = q[..., 0]
    t12 = q[..., 0] + q[..., 1]
    return np.stack(
        [arm.link1 * np.cos(t1) + arm.link2 * np.cos(t12), arm.link1 * np.sin(t1) + arm.link2 * np.sin(t12)],
        axis=-1,
    )


def inverse_kinematics(arm: ArmModel, position: object) -> np.ndarray:
    """Elbow-positive analytic solution; positions outside the annulus are clipped to it."""

    p = np.asarray(position, dtype=np.float64)
    x, y = p[..., 0], p[..., 1]
    c2 = (x * x + y * y - arm.link1**2 - arm.link2**2) / (2 * arm.link1 * arm.link2)
    t2 = np.arccos(np.clip(c2, -1.0, 1.0))
    t1 = np.arctan2(y, x) - np.arctan2(arm.link2 * np.sin(t2), arm.link1 + arm.link2 * np.cos(t2))
    return np.stack([t1, t2], axis=-1)


class Normalizer(BaseModel):
    """Per-dimension (min, max) bounds mapping joint and task space onto [0, 1]."""

    model_config = ConfigDict(frozen=True)

    joint_min: Tuple[float, float]
    joint_max: Tuple[float, float]
    task_min: Tuple[float, float]
    task_max: Tuple[float, float]

    @model_validator(mode="after")
    def _check(self) -> "Normalizer":
        for lo, hi in zip(self.joint_min + self.task_min, self.joint_max + self.task_max):
            if not hi > lo:
                raise ConfigurationError(f"normalizer bound max {hi} must exceed min {lo}")
        return self

    @classmethod
    def from_arm(cls, arm: ArmModel, resolution: int = 721) -> "Normalizer":
        """Joint bounds are the ranges; task bounds enclose the whole workspace.

        The workspace box comes from a dense joint grid (range endpoints included),
        padded by the worst-case grid discretization gap.
        """

        t1 = np.linspace(*arm.theta1_range, resolution)
        t2 = np.linspace(*arm.theta2_range, resolution)
        grid = np.stack(np.meshgrid(t1, t2, indexing="ij"), axis=-1).reshape(-1, 2)
        pos = forward_kinematics(arm, grid)
        step = max(t1[1] - t1[0], t2[1] - t2[0])
        pad = arm.reach * step * step
        lo = pos.min(axis=0) - pad
        hi = pos.max(axis=0) + pad
        return cls(
            joint_min=(arm.theta1_range[0], arm.theta2_range[0]),
            joint_max=(arm.theta1_range[1], arm.theta2_range[1]),
            task_min=(float(lo[0]), float(lo[1])),
            task_max=(float(hi[0]), float(hi[1])),
        )

    def normalize_joints(self, joints: object) -> np.ndarray:
        return _scale(joints, self.joint_min, self.joint_max)

    def denormalize_joints(self, joints_norm: object) -> np.ndarray:
        return _unscale(joints_norm, self.joint_min, self.joint_max)

    def normalize_positions(self, positions: object) -> np.ndarray:
        return _scale(positions, self.task_min, self.task_max)

    def denormalize_positions(self, positions_norm: object) -> np.ndarray:
        return _unscale(positions_norm, self.task_min, self.task_max)


def _scale(values: object, lo: Tuple[float, float], hi: Tuple[float, float]) -> np.ndarray:
    lo_a, hi_a = np.asarray(lo), np.asarray(hi)
    return (np.asarray(values, dtype=np.float64) - lo_a) / (hi_a - lo_a)


def _unscale(values: object, lo: Tuple[float, float], hi: Tuple[float, float]) -> np.ndarray:
    lo_a, hi_a = np.asarray(lo), np.asarray(hi)
    return np.asarray(values, dtype=np.float64) * (hi_a - lo_a) + lo_a


@dataclass(frozen=True)
class BabbleSample:
    joints: Tuple[float, float]
    position: Tuple[float, float]
    joints_norm: Tuple[float, float]
    position_norm: Tuple[float, float]


@dataclass(frozen=True)
class BabbleSet:
    """Motor-babbling samples stored column-wise; indexing yields BabbleSample."""

    joints: np.ndarray
    positions: np.ndarray
    joints_norm: np.ndarray
    positions_norm: np.ndarray
    normalizer: Normalizer

    def __len__(self) -> int:
        return int(self.joints.shape[0])

    def __getitem__(self, i: int) -> BabbleSample:
        return BabbleSample(
            joints=tuple(self.joints[i]),
            position=tuple(self.positions[i]),
            joints_norm=tuple(self.joints_norm[i]),
            position_norm=tuple(self.positions_norm[i]),
        )

    def __iter__(self) -> Iterator[BabbleSample]:
        for i in range(len(self)):
            yield self[i]


def babble(arm: ArmModel, n: int, seed: int, normalizer: Optional[Normalizer] = None) -> BabbleSet:
    """Uniform random joint angles within the arm's ranges and their FK positions.

    Pass ``normalizer`` to reuse bounds frozen at initial training time.
    """

    if n < 1:
        raise InputError(f"babble needs n >= 1, got {n}")
    rng = np.random.default_rng(seed)
    joints = np.stack(
        [rng.uniform(*arm.theta1_range, size=n), rng.uniform(*arm.theta2_range, size=n)],
        axis=1,
    )
    positions = forward_kinematics(arm, joints)
    norm = normalizer or Normalizer.from_arm(arm)
    logger.debug("babble n=%d seed=%d link1=%.3f link2=%.3f", n, seed, arm.link1, arm.link2)
    return BabbleSet(
        joints=joints,
        positions=positions,
        joints_norm=norm.normalize_joints(joints),
        positions_norm=norm.normalize_positions(positions),
        normalizer=norm,
    )


PerturbKind = Literal["stretch", "shorten"]


def perturb(arm: ArmModel, kind: PerturbKind, link: int, factor: float) -> ArmModel:
    """Multiply one link length by ``factor``; joint ranges are unchanged."""

    if not factor > 0:
        raise ParameterError(f"perturbation factor must be > 0, got {factor}")
    if kind == "stretch" and factor < 1:
        raise ParameterError(f"stretch needs factor >= 1, got {factor}")
    if kind == "shorten" and factor > 1:
        raise ParameterError(f"shorten needs factor <= 1, got {factor}")
    if link not in (1, 2):
        raise ParameterError(f"link must be 1 or 2, got {link}")
    field = "link1" if link == 1 else "link2"
    return arm.model_copy(update={field: getattr(arm, field) * factor})


BABBLE_COLUMNS = ["theta1", "theta2", "x", "y"]


def write_babble_csv(samples: BabbleSet, path: Union[str, Path]) -> Path:
    """One sample per line: theta1, theta2 (rad), x, y (mm), with a header."""

    out = Path(path)
    frame = pd.DataFrame(np.hstack([samples.joints, samples.positions]), columns=BABBLE_COLUMNS)
    frame.to_csv(out, index=False, float_format="%.17g", lineterminator="\n")
    return out


def read_babble_csv(path: Union[str, Path], normalizer: Normalizer) -> BabbleSet:
    frame = pd.read_csv(path, float_precision="round_trip")
    missing = [c for c in BABBLE_COLUMNS if c not in frame.columns]
    if missing:
        raise InputError(f"babble CSV {path} misses columns {missing}")
    joints = frame[["theta1", "theta2"]].to_numpy(dtype=np.float64)
    positions = frame[["x", "y"]].to_numpy(dtype=np.float64)
    return BabbleSet(
        joints=joints,
        positions=positions,
        joints_norm=normalizer.normalize_joints(joints),
        positions_norm=normalizer.normalize_positions(positions),
        normalizer=normalizer,
    )
