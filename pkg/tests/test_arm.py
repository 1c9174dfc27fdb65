import math

import numpy as np
import pytest

from sensorimap.arm.kinematics import (
    ArmModel,
    Normalizer,
    babble,
    forward_kinematics,
    inverse_kinematics,
    perturb,
    read_babble_csv,
    write_babble_csv,
)
from sensorimap.core.exceptions import ConfigurationError, InputError, ParameterError


def test_fully_extended_arm(arm):
    assert np.allclose(forward_kinematics(arm, [0.0, 0.0]), [300.0, 0.0])
    assert np.allclose(forward_kinematics(arm, [math.pi / 2, 0.0]), [0.0, 300.0], atol=1e-12)


def test_thirty_sixty_pose(arm):
    x, y = forward_kinematics(arm, [math.pi / 6, math.pi / 3])
    assert x == pytest.approx(150 * math.cos(math.pi / 6) + 150 * math.cos(math.pi / 2))
    assert x == pytest.approx(129.9038, abs=1e-4)
    assert y == pytest.approx(225.0)


def test_forward_kinematics_matches_scalar_trig():
    arm = ArmModel(link1=120.0, link2=95.0)
    q = np.random.default_rng(0).uniform([0, 0], [math.pi / 2, 5 * math.pi / 6], size=(10_000, 2))
    oracle = np.array(
        [
            (
                120.0 * math.cos(t1) + 95.0 * math.cos(t1 + t2),
                120.0 * math.sin(t1) + 95.0 * math.sin(t1 + t2),
            )
            for t1, t2 in q
        ]
    )
    np.testing.assert_allclose(forward_kinematics(arm, q), oracle, rtol=1e-12, atol=1e-10)


def test_inverse_kinematics_recovers_generating_joints(arm):
    q = np.random.default_rng(1).uniform([0, 0.05], [math.pi / 2, 5 * math.pi / 6], size=(1000, 2))
    np.testing.assert_allclose(inverse_kinematics(arm, forward_kinematics(arm, q)), q, atol=1e-6)


def test_babbled_positions_stay_in_the_workspace(arm):
    samples = babble(arm, 5000, seed=2)
    r = np.linalg.norm(samples.positions, axis=1)
    assert np.all(r <= arm.link1 + arm.link2 + 1e-9)
    assert np.all(r >= abs(arm.link1 - arm.link2) - 1e-9)
    assert np.all((samples.joints_norm >= 0) & (samples.joints_norm <= 1))
    assert np.all((samples.positions_norm >= 0) & (samples.positions_norm <= 1))


def test_babble_is_deterministic(arm):
    a, b = babble(arm, 1, seed=5), babble(arm, 1, seed=5)
    assert a[0] == b[0]
    assert len(babble(arm, 3, seed=5)) == 3


def test_babble_needs_samples(arm):
    with pytest.raises(InputError):
        babble(arm, 0, seed=0)


def test_babble_covers_the_joint_ranges(arm):
    samples = babble(arm, 100_000, seed=3)
    for dim, (lo, hi) in enumerate([arm.theta1_range, arm.theta2_range]):
        tol = 0.01 * (hi - lo)
        assert abs(samples.joints[:, dim].min() - lo) < tol
        assert abs(samples.joints[:, dim].max() - hi) < tol


def test_normalizer_round_trip(arm):
    norm = Normalizer.from_arm(arm)
    samples = babble(arm, 500, seed=4, normalizer=norm)
    np.testing.assert_allclose(norm.denormalize_joints(samples.joints_norm), samples.joints, atol=1e-9)
    np.testing.assert_allclose(norm.denormalize_positions(samples.positions_norm), samples.positions, atol=1e-9)


def test_normalizer_rejects_empty_bounds():
    with pytest.raises(ConfigurationError):
        Normalizer(joint_min=(0, 0), joint_max=(1, 0), task_min=(0, 0), task_max=(1, 1))


def test_perturb(arm):
    assert perturb(arm, "stretch", 2, 1.0) == arm
    stretched = perturb(arm, "stretch", 2, 1.5)
    assert stretched.link2 == 225.0
    assert stretched.link1 == 150.0
    assert stretched.theta2_range == arm.theta2_range
    assert perturb(arm, "shorten", 2, 0.6).reach == pytest.approx(240.0)


@pytest.mark.parametrize(
    "kind,link,factor",
    [("stretch", 2, 0.0), ("shorten", 2, -1.0), ("stretch", 2, 0.5), ("shorten", 1, 1.2), ("stretch", 3, 1.5)],
)
def test_perturb_rejects_bad_arguments(arm, kind, link, factor):
    with pytest.raises(ParameterError):
        perturb(arm, kind, link, factor)


def test_invalid_arm():
    with pytest.raises(ConfigurationError):
        ArmModel(link1=0.0)
    with pytest.raises(ConfigurationError):
        ArmModel(theta1_range=(1.0, 0.5))


def test_babble_csv(tmp_path, arm):
    samples = babble(arm, 20, seed=6)
    path = write_babble_csv(samples, tmp_path / "babble.csv")
    lines = path.read_text().splitlines()
    assert lines[0] == "theta1,theta2,x,y"
    assert len(lines) == 21
    loaded = read_babble_csv(path, samples.normalizer)
    assert np.array_equal(loaded.joints, samples.joints)
    assert np.array_equal(loaded.positions, samples.positions)


def test_babble_csv_requires_all_columns(tmp_path, arm):
    path = tmp_path / "bad.csv"
    path.write_text("theta1,theta2,x\n0,0,300\n")
    with pytest.raises(InputError):
        read_babble_csv(path, Normalizer.from_arm(arm))
