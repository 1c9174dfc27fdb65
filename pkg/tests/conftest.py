from __future__ import annotations

import numpy as np
import pytest

from sensorimap.arm.kinematics import ArmModel, BabbleSet, Normalizer, forward_kinematics
from sensorimap.learning.bridge import AssociativeBridge
from sensorimap.learning.model import SensorimotorModel
from sensorimap.maps.lattice import SomMap
from sensorimap.maps.models import GridSpec


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run slow statistical tests")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


def exact_system(arm: ArmModel):
    """3x3 maps whose nodes sit exactly on 9 joint pairs and their FK positions,
    wired one-to-one."""

    normalizer = Normalizer.from_arm(arm)
    joints = np.array([(a, b) for a in np.linspace(0.2, 1.2, 3) for b in np.linspace(0.5, 2.0, 3)])
    positions = forward_kinematics(arm, joints)
    spec = GridSpec(rows=3, cols=3, input_dim=2)
    model = SensorimotorModel(
        motor=SomMap(spec=spec, weights=normalizer.normalize_joints(joints)),
        sensory=SomMap(spec=spec, weights=normalizer.normalize_positions(positions)),
        bridge=AssociativeBridge(strengths=np.eye(spec.size)),
        normalizer=normalizer,
    )
    samples = BabbleSet(
        joints=joints,
        positions=positions,
        joints_norm=normalizer.normalize_joints(joints),
        positions_norm=normalizer.normalize_positions(positions),
        normalizer=normalizer,
    )
    return model, samples


@pytest.fixture
def arm():
    return ArmModel()


@pytest.fixture
def exact(arm):
    return exact_system(arm)
