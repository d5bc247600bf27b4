"""
densify.linklevel
=================
Monte Carlo SINR engine for a typed user at the origin.

Each trial samples a Poisson network in the typed-user disk, associates the
user with the geometrically nearest BS and treats every other BS as an
active interferer (full buffer).  Powers are equal across BSs, so the
transmit power only matters when the optional noise floor is on.

Trial *t* always draws from ``SeedSchedule(seed).stream(tag, t)`` whatever
the density, which gives common random numbers along a throughput curve.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate

from densify.errors import InvalidArgumentError, SingularityError
from densify.estimates import CoverageEstimate
from densify.geometry import KM2, Window, sample_ppp, typed_user_window_radius
from densify.pool import TrialPool, resolve
from densify.propagation import PathlossModel, db_to_linear, dbm_to_mw, gain
from densify.seeding import SeedSchedule

logger = logging.getLogger(__name__)

__all__ = [
    "Fading",
    "SimConfig",
    "ThroughputPoint",
    "sample_fading",
    "draw_network",
    "link_sinr",
    "sinr_trial",
    "coverage_probability",
    "spatial_throughput",
    "throughput_curve",
    "truncation_check",
    "single_slope_upm_coverage",
]

MIN_TRIALS = 100


class Fading(str, Enum):
    RAYLEIGH = "rayleigh"
    NONE = "none"


@dataclass(frozen=True)
class SimConfig:
    density_per_km2: float
    model: PathlossModel
    sinr_threshold_db: float = 0.0
    tx_power_dbm: float = 0.0
    fading: Fading = Fading.RAYLEIGH
    trials: int = 10_000
    seed: int = 0
    include_noise: bool = False
    noise_dbm: float = -104.0
    window_scale: float = 1.0
    tag: str = "linklevel"

    def __post_init__(self):
        object.__setattr__(self, "fading", Fading(self.fading))
        if self.trials < 1:
            raise InvalidArgumentError(f"trials must be >= 1, got {self.trials}")
        if not math.isfinite(self.sinr_threshold_db):
            raise InvalidArgumentError("SINR threshold must be finite")
        if not (self.density_per_km2 > 0 and math.isfinite(self.density_per_km2)):
            raise InvalidArgumentError(f"density must be positive, got {self.density_per_km2!r}")
        if not self.window_scale > 0:
            raise InvalidArgumentError(f"window_scale must be positive, got {self.window_scale!r}")

    @property
    def density_per_m2(self) -> float:
        return self.density_per_km2 * KM2

    @property
    def threshold_linear(self) -> float:
        return db_to_linear(self.sinr_threshold_db)

    @property
    def noise_ratio(self) -> float:
        """Noise power relative to one BS's transmit power."""
        if not self.include_noise:
            return 0.0
        return dbm_to_mw(self.noise_dbm) / dbm_to_mw(self.tx_power_dbm)

    @property
    def window(self) -> Window:
        return Window.disk(
            typed_user_window_radius(self.density_per_m2, self.model.max_breakpoint_m, scale=self.window_scale)
        )

    def with_density(self, density_per_km2: float) -> "SimConfig":
        return replace(self, density_per_km2=density_per_km2)


@dataclass(frozen=True)
class ThroughputPoint:
    density_per_km2: float
    coverage: CoverageEstimate
    st: float  # bits/(s·Hz·m²)

    @property
    def st_std_err(self) -> float:
        if self.coverage.p_hat == 0:
            return 0.0
        return self.st * self.coverage.std_err / self.coverage.p_hat


# --------------------------------------------------------------------------- #
# single trial                                                                #
# --------------------------------------------------------------------------- #
def sample_fading(fading: Fading, rng: np.random.Generator, size: Optional[int] = None):
    """Unit-mean exponential power factor (Rayleigh) or 1."""
    if Fading(fading) is Fading.NONE:
        return 1.0 if size is None else np.ones(size)
    return rng.standard_exponential(size)


def draw_network(config: SimConfig, rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
    """Distances from the typed user to every BS and their fading factors."""
    dep = sample_ppp(config.density_per_m2, config.window, rng, resample_empty=True)
    distances = dep.distances_from_origin
    fades = sample_fading(config.fading, rng, size=len(distances))
    return distances, fades


def link_sinr(
    model: PathlossModel,
    distances: np.ndarray,
    fades: np.ndarray,
    noise_ratio: float = 0.0,
) -> float:
    """SINR at the origin served by the nearest point; ``inf`` without interference or noise."""
    received = gain(model, np.asarray(distances, dtype=float)) * np.asarray(fades, dtype=float)
    serving = int(np.argmin(distances))
    interference = float(np.sum(np.delete(received, serving))) + noise_ratio
    if interference == 0.0:
        return math.inf
    return float(received[serving]) / interference


def sinr_trial(config: SimConfig, rng: np.random.Generator) -> float:
    distances, fades = draw_network(config, rng)
    try:
        return link_sinr(config.model, distances, fades, config.noise_ratio)
    except SingularityError:
        logger.debug("BS sampled at the typed user; redrawing once")
        distances, fades = draw_network(config, rng)
        return link_sinr(config.model, distances, fades, config.noise_ratio)


# --------------------------------------------------------------------------- #
# estimates                                                                   #
# --------------------------------------------------------------------------- #
def coverage_probability(config: SimConfig, pool: Optional[TrialPool] = None) -> CoverageEstimate:
    """P(SINR > tau) over ``config.trials`` independent networks."""
    if config.trials < MIN_TRIALS:
        raise InvalidArgumentError(f"coverage needs >= {MIN_TRIALS} trials, got {config.trials}")
    schedule = SeedSchedule(config.seed)
    tau = config.threshold_linear

    def _chunk(start: int, stop: int) -> int:
        return sum(int(sinr_trial(config, schedule.stream(config.tag, t)) > tau) for t in range(start, stop))

    hits = sum(resolve(pool).map_chunks(_chunk, config.trials))
    estimate = CoverageEstimate.from_counts(hits, config.trials)
    logger.debug(
        "coverage %.4g ± %.2g at %.4g /km2 (%s)",
        estimate.p_hat, estimate.std_err, config.density_per_km2, config.model.describe(),
    )
    return estimate


def spatial_throughput(density_per_km2: float, coverage: CoverageEstimate, tau_db: float) -> ThroughputPoint:
    """mu · P(SINR > tau) · log2(1 + tau) in bits/(s·Hz·m²)."""
    st = density_per_km2 * KM2 * coverage.p_hat * math.log2(1.0 + db_to_linear(tau_db))
    return ThroughputPoint(density_per_km2=float(density_per_km2), coverage=coverage, st=st)


def throughput_curve(
    config: SimConfig,
    densities_per_km2: Sequence[float],
    pool: Optional[TrialPool] = None,
) -> List[ThroughputPoint]:
    if not len(densities_per_km2):
        raise InvalidArgumentError("density list must be non-empty")
    curve = []
    for mu in densities_per_km2:
        cov = coverage_probability(config.with_density(float(mu)), pool)
        curve.append(spatial_throughput(mu, cov, config.sinr_threshold_db))
    logger.info("throughput curve for %s: %d points", config.model.describe(), len(curve))
    return curve


def truncation_check(
    config: SimConfig,
    pool: Optional[TrialPool] = None,
) -> Tuple[CoverageEstimate, CoverageEstimate, bool]:
    """
    Coverage with the window radius as configured and doubled.

    Both estimates come from the same draws: each trial samples the doubled
    window, and the base estimate drops the points beyond the configured
    radius.  The wide estimate equals ``coverage_probability`` at the doubled
    scale.
    """
    if config.trials < MIN_TRIALS:
        raise InvalidArgumentError(f"coverage needs >= {MIN_TRIALS} trials, got {config.trials}")
    wide_config = replace(config, window_scale=2 * config.window_scale)
    radius = config.window.size_m
    schedule = SeedSchedule(config.seed)
    tau = config.threshold_linear

    def _trial(t: int) -> Tuple[bool, bool]:
        rng = schedule.stream(config.tag, t)
        distances, fades = draw_network(wide_config, rng)
        try:
            wide_sinr = link_sinr(config.model, distances, fades, config.noise_ratio)
        except SingularityError:
            distances, fades = draw_network(wide_config, rng)
            wide_sinr = link_sinr(config.model, distances, fades, config.noise_ratio)
        inside = distances <= radius
        if not inside.any():
            return False, wide_sinr > tau
        return link_sinr(config.model, distances[inside], fades[inside], config.noise_ratio) > tau, wide_sinr > tau

    def _chunk(start: int, stop: int) -> Tuple[int, int]:
        hits = [_trial(t) for t in range(start, stop)]
        return sum(b for b, _ in hits), sum(w for _, w in hits)

    counts = resolve(pool).map_chunks(_chunk, config.trials)
    base = CoverageEstimate.from_counts(sum(b for b, _ in counts), config.trials)
    wide = CoverageEstimate.from_counts(sum(w for _, w in counts), config.trials)
    combined = math.hypot(base.std_err, wide.std_err)
    ok = abs(base.p_hat - wide.p_hat) <= 2 * max(combined, 1.0 / config.trials)
    if not ok:
        logger.warning(
            "window truncation moves coverage from %.4f to %.4f at %.4g /km2",
            base.p_hat, wide.p_hat, config.density_per_km2,
        )
    return base, wide, ok


# --------------------------------------------------------------------------- #
# oracle                                                                      #
# --------------------------------------------------------------------------- #
def single_slope_upm_coverage(alpha: float, tau_db: float) -> float:
    """Interference-limited nearest-BS Rayleigh coverage under d^-alpha, infinite plane."""
    if not alpha > 2:
        raise InvalidArgumentError(f"alpha must exceed 2, got {alpha!r}")
    tau = db_to_linear(tau_db)
    if alpha == 4:
        s = math.sqrt(tau)
        rho = s * (math.pi / 2 - math.atan(1 / s))
    else:
        lower = tau ** (-2 / alpha)
        tail, _ = integrate.quad(lambda u: 1.0 / (1.0 + u ** (alpha / 2)), lower, math.inf)
        rho = tau ** (2 / alpha) * tail
    return 1.0 / (1.0 + rho)
