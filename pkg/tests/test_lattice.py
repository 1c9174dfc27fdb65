import numpy as np
import pytest

from sensorimap.core.exceptions import BoundsError, ConfigurationError, ParameterError
from sensorimap.maps.lattice import (
    boundary_mask,
    grid_distance_sq,
    neighbor_table,
    neighbors_within,
    new_map,
    node_to_rc,
    rc_to_node,
)
from sensorimap.maps.models import GridSpec


def test_new_map_weights_in_unit_box():
    m = new_map(GridSpec(rows=2, cols=2, input_dim=2), seed=7)
    assert m.weights.shape == (4, 2)
    assert np.all((m.weights >= 0) & (m.weights <= 1))


def test_new_map_is_deterministic_per_seed():
    spec = GridSpec(rows=2, cols=2, input_dim=2)
    assert np.array_equal(new_map(spec, 3).weights, new_map(spec, 3).weights)
    assert not np.array_equal(new_map(spec, 3).weights, new_map(spec, 4).weights)


def test_grid_size():
    assert GridSpec(rows=30, cols=30, input_dim=2).size == 900


def test_invalid_grid_is_a_configuration_error():
    with pytest.raises(ConfigurationError):
        GridSpec(rows=0, cols=3, input_dim=2)
    with pytest.raises(ConfigurationError):
        GridSpec(rows=3, cols=3, input_dim=0)


def test_grid_distance():
    spec = GridSpec(rows=10, cols=10, input_dim=2)
    assert grid_distance_sq(5, 5, spec) == 0
    assert grid_distance_sq(12, 13, spec) == 1
    assert grid_distance_sq(rc_to_node(0, 0, spec), rc_to_node(3, 4, spec), spec) == 25


def test_out_of_range_node_is_a_bounds_error():
    spec = GridSpec(rows=4, cols=4, input_dim=2)
    with pytest.raises(BoundsError):
        grid_distance_sq(0, 16, spec)
    with pytest.raises(IndexError):
        node_to_rc(-1, spec)
    with pytest.raises(BoundsError):
        rc_to_node(4, 0, spec)


def test_row_major_layout():
    spec = GridSpec(rows=3, cols=5, input_dim=2)
    assert node_to_rc(7, spec) == (1, 2)
    assert rc_to_node(1, 2, spec) == 7


def test_neighbors_within():
    spec = GridSpec(rows=5, cols=5, input_dim=2)
    center = rc_to_node(2, 2, spec)
    assert neighbors_within(center, 0, spec) == {center}
    assert neighbors_within(center, 1, spec) == {center, center - 1, center + 1, center - 5, center + 5}
    assert neighbors_within(center, 100, spec) == set(range(spec.size))
    with pytest.raises(ParameterError):
        neighbors_within(center, -1, spec)


def test_neighbor_table_excludes_self_and_clips_at_edges():
    spec = GridSpec(rows=4, cols=4, input_dim=2)
    table = neighbor_table(spec, 1.0)
    assert sorted(table[0].tolist()) == [1, 4]
    assert sorted(table[5].tolist()) == [1, 4, 6, 9]


def test_boundary_mask():
    mask = boundary_mask(GridSpec(rows=4, cols=4, input_dim=2)).reshape(4, 4)
    assert mask.sum() == 12
    assert not mask[1:3, 1:3].any()


def test_neighbors_within_grows_with_radius():
    spec = GridSpec(rows=6, cols=7, input_dim=2)
    radii = [0, 0.5, 1, 1.5, 2, 2.9, 3, 4.5, 10]
    for center in (0, 10, 20, 41):
        sets = [neighbors_within(center, r, spec) for r in radii]
        for small, large in zip(sets, sets[1:]):
            assert small <= large
        assert sets[-1] == set(range(spec.size))
