"""
densify.geometry
================
Transmitter deployments, nearest-point association and link-distance
statistics.

Densities are per m² inside this module; the ``*_per_km2`` names are used
wherever a value crosses an external interface (``KM2`` converts).

Typed-user experiments sample a disk centred on the user at the origin.
Its radius is the largest of
  * the radius holding ``MIN_WINDOW_POINTS`` expected points,
  * 20 mean link lengths,
  * 10 times the largest pathloss breakpoint.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from densify.errors import EmptyDeploymentError, InvalidArgumentError, ResourceLimitError
from densify.estimates import CoverageEstimate
from densify.pool import TrialPool, resolve
from densify.seeding import SeedSchedule

logger = logging.getLogger(__name__)

KM2 = 1e-6  # per-km² → per-m²
MAX_EXPECTED_POINTS = 1e8
MIN_WINDOW_POINTS = 500

DEFAULT_DENSITIES_PER_KM2 = (1.0, 25.0, 100.0, 2500.0, 1e4, 2.5e5)
DEFAULT_THRESHOLDS_M = (1.0, 29.45, 13.1, 3.25)

# published link-distance probabilities, keyed by (density per km², threshold m)
REFERENCE_LINK_PROBABILITIES: Dict[Tuple[float, float], float] = {
    (1.0, 1.0): 3.1e-6, (1.0, 29.45): 0.0027, (1.0, 13.1): 0.0005, (1.0, 3.25): 0.00003,
    (25.0, 1.0): 0.00008, (25.0, 29.45): 0.066, (25.0, 13.1): 0.013, (25.0, 3.25): 0.0008,
    (100.0, 1.0): 0.0003, (100.0, 29.45): 0.239, (100.0, 13.1): 0.052, (100.0, 3.25): 0.003,
    (2500.0, 1.0): 0.008, (2500.0, 29.45): 0.999, (2500.0, 13.1): 0.735, (2500.0, 3.25): 0.077,
    (1e4, 1.0): 0.178, (1e4, 29.45): 1.0, (1e4, 13.1): 0.995, (1e4, 3.25): 0.275,
    (2.5e5, 1.0): 0.544, (2.5e5, 29.45): 1.0, (2.5e5, 13.1): 1.0, (2.5e5, 3.25): 1.0,
}
ERRATUM_ABS = 0.01
ERRATUM_REL = 0.10


# --------------------------------------------------------------------------- #
# windows & deployments                                                       #
# --------------------------------------------------------------------------- #
class WindowShape(str, Enum):
    DISK = "disk"
    SQUARE = "square"


@dataclass(frozen=True)
class Window:
    """Disk (size = radius) or square (size = side) centred at the origin."""

    shape: WindowShape
    size_m: float

    def __post_init__(self):
        object.__setattr__(self, "shape", WindowShape(self.shape))
        if not (math.isfinite(self.size_m) and self.size_m > 0):
            raise InvalidArgumentError(f"window size must be positive, got {self.size_m!r}")

    @classmethod
    def disk(cls, radius_m: float) -> "Window":
        return cls(WindowShape.DISK, radius_m)

    @classmethod
    def square(cls, side_m: float) -> "Window":
        return cls(WindowShape.SQUARE, side_m)

    @property
    def area_m2(self) -> float:
        if self.shape is WindowShape.DISK:
            return math.pi * self.size_m**2
        return self.size_m**2

    def contains(self, points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(points)
        if self.shape is WindowShape.DISK:
            return np.hypot(pts[:, 0], pts[:, 1]) <= self.size_m
        half = self.size_m / 2
        return np.all(np.abs(pts) <= half, axis=1)

    def sample_uniform(self, n: int, rng: np.random.Generator) -> np.ndarray:
        if self.shape is WindowShape.DISK:
            radius = self.size_m * np.sqrt(rng.random(n))
            theta = 2 * np.pi * rng.random(n)
            return np.column_stack((radius * np.cos(theta), radius * np.sin(theta)))
        half = self.size_m / 2
        return rng.uniform(-half, half, size=(n, 2))


class DeploymentKind(str, Enum):
    POISSON = "poisson"
    GRID = "grid"


@dataclass(frozen=True)
class Deployment:
    positions: np.ndarray
    window: Window
    density_per_m2: float
    kind: DeploymentKind = DeploymentKind.POISSON

    def __post_init__(self):
        pts = np.array(self.positions, dtype=float).reshape(-1, 2)
        pts.flags.writeable = False
        object.__setattr__(self, "positions", pts)

    def __len__(self) -> int:
        return len(self.positions)

    @property
    def distances_from_origin(self) -> np.ndarray:
        return np.hypot(self.positions[:, 0], self.positions[:, 1])


@dataclass(frozen=True)
class LinkStatsRow:
    mean_link_m: float
    density_per_km2: float
    thresholds_m: Tuple[float, ...]
    probabilities: Tuple[float, ...]


# --------------------------------------------------------------------------- #
# sampling                                                                    #
# --------------------------------------------------------------------------- #
def sample_ppp(
    density_per_m2: float,
    window: Window,
    rng: np.random.Generator,
    *,
    resample_empty: bool = False,
) -> Deployment:
    """Homogeneous Poisson sample of intensity *density_per_m2* inside *window*."""
    if not (density_per_m2 > 0 and math.isfinite(density_per_m2)):
        raise InvalidArgumentError(f"density must be positive, got {density_per_m2!r}")
    expected = density_per_m2 * window.area_m2
    if expected > MAX_EXPECTED_POINTS:
        raise ResourceLimitError(f"expected point count {expected:.3g} exceeds {MAX_EXPECTED_POINTS:.0e}")

    count = int(rng.poisson(expected))
    while resample_empty and count == 0:
        count = int(rng.poisson(expected))
    return Deployment(window.sample_uniform(count, rng), window, density_per_m2, DeploymentKind.POISSON)


def grid_deployment(density_per_m2: float, square_side_m: float, *, guard_m: float = 0.0) -> Deployment:
    """
    Square lattice with spacing ``1/sqrt(density)`` and a half-spacing corner offset.

    A positive *guard_m* continues the lattice outside the square by whole
    rings (rounded up) so points near the edges still see neighbours on
    every side.
    """
    if not (density_per_m2 > 0 and math.isfinite(density_per_m2)):
        raise InvalidArgumentError(f"density must be positive, got {density_per_m2!r}")
    if not (guard_m >= 0 and math.isfinite(guard_m)):
        raise InvalidArgumentError(f"guard must be >= 0, got {guard_m!r}")
    window = Window.square(square_side_m)
    spacing = 1.0 / math.sqrt(density_per_m2)
    # guard against 50/16.666… rounding to 2.999…
    per_side = int(math.floor(square_side_m * math.sqrt(density_per_m2) * (1 + 1e-12)))
    if per_side < 1:
        return Deployment(np.zeros((1, 2)), window, density_per_m2, DeploymentKind.GRID)

    rings = int(math.ceil(guard_m / spacing * (1 - 1e-12))) if guard_m > 0 else 0
    axis = np.arange(-rings, per_side + rings) * spacing + spacing / 2 - square_side_m / 2
    if rings:
        window = Window.square(square_side_m + 2 * rings * spacing)
    xx, yy = np.meshgrid(axis, axis, indexing="xy")
    positions = np.column_stack((xx.ravel(), yy.ravel()))
    return Deployment(positions, window, density_per_m2, DeploymentKind.GRID)


def nearest_point(deployment: Deployment | np.ndarray, query: Sequence[float]) -> Tuple[int, float]:
    """Index and distance of the closest point; ties go to the lowest index."""
    pts = deployment.positions if isinstance(deployment, Deployment) else np.asarray(deployment, dtype=float)
    if len(pts) == 0:
        raise EmptyDeploymentError("cannot associate with an empty deployment")
    q = np.asarray(query, dtype=float)
    dist = np.hypot(pts[:, 0] - q[0], pts[:, 1] - q[1])
    idx = int(np.argmin(dist))
    return idx, float(dist[idx])


# --------------------------------------------------------------------------- #
# link-distance statistics                                                    #
# --------------------------------------------------------------------------- #
def nearest_distance_cdf(density_per_m2: float, r_m: float) -> float:
    """P(nearest point within *r_m*) = 1 - exp(-pi mu r^2)."""
    if not density_per_m2 > 0:
        raise InvalidArgumentError(f"density must be positive, got {density_per_m2!r}")
    if not r_m >= 0:
        raise InvalidArgumentError(f"r must be >= 0, got {r_m!r}")
    return -math.expm1(-math.pi * density_per_m2 * r_m**2)


def mean_link_length(density_per_m2: float) -> float:
    if not density_per_m2 > 0:
        raise InvalidArgumentError(f"density must be positive, got {density_per_m2!r}")
    return 1.0 / (2.0 * math.sqrt(density_per_m2))


def typed_user_window_radius(
    density_per_m2: float,
    max_breakpoint_m: float = 0.0,
    *,
    scale: float = 1.0,
) -> float:
    radius = max(
        math.sqrt(MIN_WINDOW_POINTS / (math.pi * density_per_m2)),
        20.0 * mean_link_length(density_per_m2),
        10.0 * max_breakpoint_m,
    )
    return scale * radius


def empirical_link_cdf(
    density_per_m2: float,
    r_m: float,
    trials: int,
    schedule: SeedSchedule,
    *,
    pool: Optional[TrialPool] = None,
    tag: str = "link_cdf",
) -> CoverageEstimate:
    """Fraction of sampled networks whose nearest point from the origin is closer than *r_m*."""
    if trials < 100:
        raise InvalidArgumentError(f"trials must be >= 100, got {trials}")
    window = Window.disk(typed_user_window_radius(density_per_m2))

    def _chunk(start: int, stop: int) -> int:
        hits = 0
        for t in range(start, stop):
            dep = sample_ppp(density_per_m2, window, schedule.stream(tag, t), resample_empty=True)
            hits += int(dep.distances_from_origin.min() < r_m)
        return hits

    hits = sum(resolve(pool).map_chunks(_chunk, trials))
    return CoverageEstimate.from_counts(hits, trials)


def table1(densities_per_km2: Sequence[float], thresholds_m: Sequence[float]) -> List[LinkStatsRow]:
    """Mean link length and P(d < threshold) for every density/threshold pair."""
    if not densities_per_km2 or not thresholds_m:
        raise InvalidArgumentError("densities and thresholds must be non-empty")
    rows = []
    for mu_km2 in densities_per_km2:
        mu = mu_km2 * KM2
        rows.append(
            LinkStatsRow(
                mean_link_m=mean_link_length(mu),
                density_per_km2=float(mu_km2),
                thresholds_m=tuple(float(t) for t in thresholds_m),
                probabilities=tuple(nearest_distance_cdf(mu, t) for t in thresholds_m),
            )
        )
    return rows


def flag_errata(rows: Sequence[LinkStatsRow]) -> List[str]:
    """Cells whose computed value departs from the published table beyond rounding."""
    notes = []
    for row in rows:
        for threshold, p in zip(row.thresholds_m, row.probabilities):
            published = REFERENCE_LINK_PROBABILITIES.get((row.density_per_km2, threshold))
            if published is None:
                continue
            diff = abs(p - published)
            if diff > ERRATUM_ABS and diff > ERRATUM_REL * published:
                notes.append(
                    f"erratum: density {row.density_per_km2:g}/km2, threshold {threshold:g} m: "
                    f"computed {p:.4f}, published {published:.4f}"
                )
    return notes
