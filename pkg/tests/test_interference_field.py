import math

import numpy as np
import pytest

from densify.errors import InvalidArgumentError
from densify.interference_field import (
    HeatmapConfig,
    Raster,
    aggregate_power_dbm,
    field_stats,
    interference_field,
    pixel_centres,
    rank_correlation,
    upper_bound_dbm,
)
from densify.pool import TrialPool
from densify.propagation import gain, make_model

UPM_SINGLE = make_model("upm", [], [4.0])
UPM_DUAL = make_model("upm", [12.5], [2.0, 4.0])
BPM_DUAL = make_model("bpm", [12.5], [2.0, 4.0])


def render(model, density=3.6e3, resolution=50, **kw):
    return interference_field(HeatmapConfig(tx_density_per_km2=density, model=model, resolution=resolution, **kw))


# --------------------------------------------------------------------------- #
# point evaluations                                                           #
# --------------------------------------------------------------------------- #
def test_single_tx_at_breakpoint_distance():
    value = aggregate_power_dbm(BPM_DUAL, np.array([[0.0, 0.0]]), np.array([[12.5, 0.0]]), 20.0)
    assert value[0] == pytest.approx(-1.97, abs=0.01)
    assert value[0] == pytest.approx(20 + 10 * math.log10(0.006359), abs=1e-3)


def test_pixel_on_tx_gets_full_power_under_bounded_model():
    tx = np.array([[0.0, 0.0], [10.0, 0.0]])
    value = aggregate_power_dbm(BPM_DUAL, tx, np.array([[0.0, 0.0]]), 20.0)
    expected = 10 * math.log10(100.0 * (1.0 + gain(BPM_DUAL, 10.0)))
    assert value[0] == pytest.approx(expected, rel=1e-12)


def test_pixel_centres_are_offset_by_half_a_pixel():
    axis = pixel_centres(50.0, 50)
    assert axis[0] == pytest.approx(-24.5)
    assert axis[-1] == pytest.approx(24.5)
    assert len(axis) == 50


def test_config_validation():
    with pytest.raises(InvalidArgumentError):
        HeatmapConfig(tx_density_per_km2=3.6e3, model=BPM_DUAL, resolution=1)
    with pytest.raises(InvalidArgumentError):
        HeatmapConfig(tx_density_per_km2=0.0, model=BPM_DUAL)
    with pytest.raises(InvalidArgumentError):
        HeatmapConfig(tx_density_per_km2=3.6e3, model=BPM_DUAL, guard_m=-1.0)


# --------------------------------------------------------------------------- #
# rasters                                                                     #
# --------------------------------------------------------------------------- #
def test_raster_shape_and_finite():
    raster = render(UPM_SINGLE, resolution=40)
    assert raster.values_dbm.shape == (40, 40)
    assert np.all(np.isfinite(raster.values_dbm))
    # 3x3 lattice in the square plus one guard ring
    assert len(raster.tx_positions) == 25
    assert len(render(UPM_SINGLE, resolution=4, guard_m=0.0).tx_positions) == 9
    low, high = raster.limits
    assert low < high


def test_bounded_raster_respects_upper_bound():
    for guard, n_tx in ((0.0, 625), (12.5, 39 * 39)):
        config = HeatmapConfig(tx_density_per_km2=2.5e5, model=BPM_DUAL, resolution=60, fading="none", guard_m=guard)
        raster = interference_field(config)
        assert len(raster.tx_positions) == n_tx
        assert upper_bound_dbm(config, raster) == pytest.approx(20 + 10 * math.log10(n_tx))
        assert np.all(raster.values_dbm <= upper_bound_dbm(config, raster) + 1e-9)


def test_unbounded_dominates_bounded_pixelwise():
    upm = render(UPM_DUAL, resolution=50)
    bpm = render(BPM_DUAL, resolution=50)
    assert np.all(upm.values_dbm >= bpm.values_dbm - 1e-9)


def test_symmetric_without_fading():
    v = render(BPM_DUAL, resolution=51).values_dbm
    np.testing.assert_allclose(v, v.T, rtol=0, atol=1e-9)
    np.testing.assert_allclose(v, v[::-1, :], rtol=0, atol=1e-9)
    np.testing.assert_allclose(v, v[:, ::-1], rtol=0, atol=1e-9)


def test_fading_is_deterministic_and_thread_invariant():
    config = HeatmapConfig(tx_density_per_km2=3.6e3, model=BPM_DUAL, resolution=30, fading="rayleigh", seed=9)
    first = interference_field(config)
    with TrialPool(threads=4) as pool:
        second = interference_field(config, pool)
    assert np.array_equal(first.values_dbm, second.values_dbm)
    other = interference_field(HeatmapConfig(3.6e3, BPM_DUAL, resolution=30, fading="rayleigh", seed=10))
    assert not np.array_equal(first.values_dbm, other.values_dbm)


# --------------------------------------------------------------------------- #
# statistics                                                                  #
# --------------------------------------------------------------------------- #
def test_constant_raster_has_zero_dynamic_range():
    raster = Raster(50.0, 4, np.full((4, 4), -3.0), np.zeros((1, 2)))
    stats = field_stats(raster)
    assert stats.dynamic_range_db == 0.0
    assert stats.min == stats.max == stats.p50 == -3.0


def test_stats_are_order_statistics():
    raster = Raster(1.0, 10, np.arange(100, dtype=float).reshape(10, 10), np.zeros((1, 2)))
    stats = field_stats(raster)
    assert (stats.min, stats.max) == (0.0, 99.0)
    assert stats.p1 <= stats.p50 <= stats.p99


def test_dense_grid_unbounded_range_exceeds_bounded():
    upm = field_stats(render(UPM_SINGLE, density=2.5e5, resolution=100))
    bpm = field_stats(render(BPM_DUAL, density=2.5e5, resolution=100))
    assert upm.dynamic_range_db > bpm.dynamic_range_db


def test_sparse_grid_single_slope_and_bounded_rank_correlate():
    rho = rank_correlation(render(UPM_SINGLE, resolution=500), render(BPM_DUAL, resolution=500))
    assert rho > 0.95


def test_sparse_grid_dual_slope_models_rank_correlate():
    assert rank_correlation(render(UPM_DUAL, resolution=100), render(BPM_DUAL, resolution=100)) > 0.95


def test_rank_correlation_needs_equal_shapes():
    with pytest.raises(InvalidArgumentError):
        rank_correlation(render(BPM_DUAL, resolution=10), render(BPM_DUAL, resolution=12))
