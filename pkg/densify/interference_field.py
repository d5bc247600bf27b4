"""
densify.interference_field
==========================
Aggregate received power over a square region for a grid deployment.

Pixel centres sit at ``(k + 1/2)·side/resolution - side/2``; the half-pixel
offset keeps them off the Tx lattice for the standard configurations, so
unbounded models stay finite.  Every grid Tx contributes (no serving-Tx
exclusion), including the lattice rings within ``guard_m`` outside the
square: the grid covers the plane, the square is only the part rendered.  With fading on, row *r* draws its (pixel, Tx) factors from
``SeedSchedule(seed).stream("heatmap", r)``, so rows can render in any
order.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import stats

from densify.errors import InvalidArgumentError
from densify.geometry import KM2, Deployment, grid_deployment
from densify.linklevel import Fading, sample_fading
from densify.pool import TrialPool, resolve
from densify.propagation import PathlossModel, dbm_to_mw, gain, mw_to_dbm
from densify.seeding import SeedSchedule

logger = logging.getLogger(__name__)

ROWS_PER_CHUNK = 8
FADING_TAG = "heatmap"


@dataclass(frozen=True)
class HeatmapConfig:
    tx_density_per_km2: float
    model: PathlossModel
    side_m: float = 50.0
    resolution: int = 500
    tx_power_dbm: float = 20.0
    fading: Fading = Fading.NONE
    seed: int = 0
    guard_m: float = 12.5

    def __post_init__(self):
        object.__setattr__(self, "fading", Fading(self.fading))
        if self.resolution < 2:
            raise InvalidArgumentError(f"resolution must be >= 2, got {self.resolution}")
        if not self.tx_density_per_km2 > 0:
            raise InvalidArgumentError(f"Tx density must be positive, got {self.tx_density_per_km2!r}")
        if not self.side_m > 0:
            raise InvalidArgumentError(f"side must be positive, got {self.side_m!r}")
        if not self.guard_m >= 0:
            raise InvalidArgumentError(f"guard must be >= 0, got {self.guard_m!r}")


@dataclass(frozen=True)
class Raster:
    side_m: float
    resolution: int
    values_dbm: np.ndarray  # row-major, row r ↔ y increasing
    tx_positions: np.ndarray

    @property
    def limits(self):
        return float(self.values_dbm.min()), float(self.values_dbm.max())


@dataclass(frozen=True)
class FieldStats:
    min: float
    max: float
    p1: float
    p50: float
    p99: float

    @property
    def dynamic_range_db(self) -> float:
        return self.p99 - self.p1


def pixel_centres(side_m: float, resolution: int) -> np.ndarray:
    step = side_m / resolution
    return (np.arange(resolution) + 0.5) * step - side_m / 2


def aggregate_power_dbm(
    model: PathlossModel,
    tx_positions: np.ndarray,
    points: np.ndarray,
    tx_power_dbm: float,
    fades: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Total received power (dBm) at each point from every Tx; *fades* is (points, Tx)."""
    pts = np.atleast_2d(points)
    tx = np.atleast_2d(tx_positions)
    dist = np.hypot(pts[:, None, 0] - tx[None, :, 0], pts[:, None, 1] - tx[None, :, 1])
    power = gain(model, dist)
    if fades is not None:
        power = power * fades
    return mw_to_dbm(dbm_to_mw(tx_power_dbm) * power.sum(axis=1))


def interference_field(config: HeatmapConfig, pool: Optional[TrialPool] = None) -> Raster:
    deployment: Deployment = grid_deployment(config.tx_density_per_km2 * KM2, config.side_m, guard_m=config.guard_m)
    tx = deployment.positions
    axis = pixel_centres(config.side_m, config.resolution)
    schedule = SeedSchedule(config.seed)
    logger.info(
        "rendering %dx%d raster: %d Tx, %s, fading %s",
        config.resolution, config.resolution, len(tx), config.model.describe(), config.fading.value,
    )

    def _rows(start: int, stop: int) -> np.ndarray:
        out = np.empty((stop - start, config.resolution))
        for r in range(start, stop):
            points = np.column_stack((axis, np.full(config.resolution, axis[r])))
            fades = None
            if config.fading is Fading.RAYLEIGH:
                rng = schedule.stream(FADING_TAG, r)
                fades = sample_fading(config.fading, rng, size=config.resolution * len(tx))
                fades = fades.reshape(config.resolution, len(tx))
            out[r - start] = aggregate_power_dbm(config.model, tx, points, config.tx_power_dbm, fades)
        return out

    blocks = resolve(pool).map_chunks(_rows, config.resolution, chunk_size=ROWS_PER_CHUNK)
    values = np.vstack(blocks)
    return Raster(config.side_m, config.resolution, values, tx.copy())


def field_stats(raster: Raster) -> FieldStats:
    v = raster.values_dbm.ravel()
    p1, p50, p99 = np.percentile(v, [1, 50, 99], method="inverted_cdf")
    return FieldStats(min=float(v.min()), max=float(v.max()), p1=float(p1), p50=float(p50), p99=float(p99))


def rank_correlation(a: Raster, b: Raster) -> float:
    """Spearman correlation of pixel values between two rasters of equal shape."""
    if a.values_dbm.shape != b.values_dbm.shape:
        raise InvalidArgumentError("rasters must share the same shape")
    rho, _ = stats.spearmanr(a.values_dbm.ravel(), b.values_dbm.ravel())
    return float(rho)


def upper_bound_dbm(config: HeatmapConfig, raster: Raster) -> float:
    """tx_power + 10·log10(N_tx): no bounded-model pixel can exceed it."""
    return config.tx_power_dbm + 10 * math.log10(len(raster.tx_positions))
