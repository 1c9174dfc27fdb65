import math

import numpy as np
import pytest

from sensorimap.core.exceptions import BoundsError, ConfigurationError, ParameterError
from sensorimap.maps.lattice import SomMap, new_map
from sensorimap.maps.models import DensityParams, GridSpec, default_schedule
from sensorimap.maps.quality import boundary_spacing, interior_spacing
from sensorimap.maps.som import train_som
from sensorimap.maps.vdsom import (
    density_coefficient,
    make_amplitude,
    train_vdsom,
    vdsom_amplitude,
    vdsom_neighborhood,
)


SPEC = GridSpec(rows=2, cols=2, input_dim=2)


def test_density_is_one_for_coincident_neighbors():
    m = SomMap(spec=SPEC, weights=np.full((4, 2), 0.3))
    assert density_coefficient(m, 0, DensityParams()) == 1.0


def test_density_from_squared_neighbor_distance():
    # node 0 has lattice neighbors 1 and 2; only node 1 is displaced
    m = SomMap(spec=SPEC, weights=[[0, 0], [1, 0], [0, 0], [9, 9]])
    assert density_coefficient(m, 0, DensityParams(spacing_scale=0)) == pytest.approx(math.exp(-1))


def test_density_distances_are_scaled_by_grid_spacing():
    m = SomMap(spec=SPEC, weights=[[0, 0], [1, 0], [0, 0], [9, 9]])
    # 2x2 grid: unit = 2 / (2 - 1), so a unit displacement counts as 0.5
    assert density_coefficient(m, 0, DensityParams(spacing_scale=2.0)) == pytest.approx(math.exp(-0.25))
    assert DensityParams().distance_unit(GridSpec(rows=30, cols=30, input_dim=2)) == pytest.approx(2 / 29)
    assert DensityParams(spacing_scale=0).distance_unit(GridSpec(rows=30, cols=30, input_dim=2)) == 1.0


def test_density_separates_even_and_sparse_maps_of_the_unit_box():
    spec = GridSpec(rows=10, cols=10, input_dim=2)
    even = np.stack(np.meshgrid(np.linspace(0, 1, 10), np.linspace(0, 1, 10), indexing="ij"), axis=-1).reshape(-1, 2)
    sparse = SomMap(spec=spec, weights=even * 1.5)
    params = DensityParams()
    centre = 44
    dense_rho = density_coefficient(SomMap(spec=spec, weights=even), centre, params)
    assert dense_rho == pytest.approx(math.exp(-1.0))
    assert density_coefficient(sparse, centre, params) == pytest.approx(math.exp(-2.25))
    assert density_coefficient(SomMap(spec=spec, weights=even), centre, DensityParams(spacing_scale=0)) > 0.9


def test_density_clamps_at_floor():
    m = SomMap(spec=SPEC, weights=[[0, 0], [50, 0], [0, 50], [0, 0]])
    assert density_coefficient(m, 0, DensityParams(rho_floor=0.05)) == 0.05


def test_density_rejects_unknown_node():
    with pytest.raises(BoundsError):
        density_coefficient(new_map(SPEC, 0), 4, DensityParams())


def test_density_params_validation():
    with pytest.raises(ConfigurationError):
        DensityParams(rho_floor=0.0)
    with pytest.raises(ConfigurationError):
        DensityParams(local_radius=-1.0)
    with pytest.raises(ConfigurationError):
        DensityParams(spacing_scale=-1.0)


def test_amplitude_is_zero_at_start():
    assert vdsom_amplitude(0, 3.0, 1000.0, 0.5) == 0.0


def test_amplitude_grows_as_density_drops():
    assert vdsom_amplitude(200, 3.0, 1000.0, 0.2) > vdsom_amplitude(200, 3.0, 1000.0, 0.8)


def test_amplitude_at_time_constant():
    assert vdsom_amplitude(1000, 1.0, 1000.0, 1.0) == pytest.approx(math.exp(-1))
    spec = GridSpec(rows=5, cols=5, input_dim=2)
    assert vdsom_neighborhood(7, 7, 1000, 1.0, 1000.0, 1.0, spec) == pytest.approx(math.exp(-1))


def test_neighborhood_is_clamped_at_one():
    spec = GridSpec(rows=5, cols=5, input_dim=2)
    assert vdsom_neighborhood(7, 7, 500, 5.0, 100.0, 0.05, spec) == 1.0


def test_amplitude_parameter_errors():
    with pytest.raises(ParameterError):
        vdsom_amplitude(10, 0.0, 100.0, 0.5)
    with pytest.raises(ParameterError):
        vdsom_amplitude(10, 1.0, 100.0, 0.0)
    with pytest.raises(ParameterError):
        vdsom_amplitude(-1, 1.0, 100.0, 0.5)


def test_disabled_density_has_no_amplitude():
    assert make_amplitude(SPEC, DensityParams(enabled=False), 10.0) is None
    assert make_amplitude(SPEC, DensityParams(), 10.0) is not None


def test_vdsom_training_is_deterministic():
    spec = GridSpec(rows=6, cols=6, input_dim=2)
    data = np.random.default_rng(1).random((400, 2))
    sched = default_schedule(spec, total_iters=400, seed=3)
    a, _ = train_vdsom(new_map(spec, 2), data, sched, DensityParams())
    b, _ = train_vdsom(new_map(spec, 2), data, sched, DensityParams())
    assert np.array_equal(a.weights, b.weights)
    assert np.all((a.weights >= 0) & (a.weights <= 1))


@pytest.mark.slow
def test_vdsom_packs_the_boundary_tighter_than_som():
    spec = GridSpec(rows=30, cols=30, input_dim=2)
    wins = 0
    for seed in range(10):
        data = np.random.default_rng(100 + seed).random((10_000, 2))
        sched = default_schedule(spec, total_iters=30_000, seed=seed)
        som, _ = train_som(new_map(spec, seed), data, sched)
        vdsom, _ = train_vdsom(new_map(spec, seed), data, sched, DensityParams())
        wins += boundary_spacing(vdsom) < boundary_spacing(som)
        assert interior_spacing(vdsom) > 0
    assert wins >= 9
