from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from sensorimap.arm.kinematics import Normalizer
from sensorimap.learning.bridge import AssociativeBridge, QueryMode, query_forward, query_inverse
from sensorimap.maps.lattice import SomMap


@dataclass
class SensorimotorModel:
    """Motor map, sensory map, the bridge between them and the frozen normalization bounds."""

    motor: SomMap
    sensory: SomMap
    bridge: AssociativeBridge
    normalizer: Normalizer

    def __post_init__(self) -> None:
        self.bridge.check_maps(self.motor, self.sensory)

    def forward(self, joints: object, sigma_q: float = 1.0, mode: QueryMode = "argmax") -> np.ndarray:
        """Joint angles in radians -> predicted end-effector position in mm."""

        x = self.normalizer.normalize_joints(joints)
        y = query_forward(self.bridge, self.motor, self.sensory, x, sigma_q, mode)
        return self.normalizer.denormalize_positions(y)

    def inverse(self, position: object, sigma_q: float = 1.0, mode: QueryMode = "argmax") -> np.ndarray:
        """End-effector position in mm -> predicted joint angles in radians."""

        y = self.normalizer.normalize_positions(position)
        x = query_inverse(self.bridge, self.motor, self.sensory, y, sigma_q, mode)
        return self.normalizer.denormalize_joints(x)

    def copy(self) -> "SensorimotorModel":
        return SensorimotorModel(
            motor=self.motor.copy(),
            sensory=self.sensory.copy(),
            bridge=self.bridge.copy(),
            normalizer=self.normalizer,
        )
