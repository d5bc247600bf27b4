"""
densify.propagation
===================
Distance-dependent channel gain and propagation-region boundaries.

Two model families share one evaluation path:

* **bounded** (BPM) – ``eta_n * (1 + d**alpha_n)**-1`` on segment *n*; gain
  never exceeds 1 and equals 1 at the antenna.
* **unbounded** (UPM) – ``eta_n * d**-alpha_n``; diverges at ``d -> 0`` and
  is a hard error at ``d == 0``.

Segment *n* covers ``(R_n, R_{n+1}]`` and ``d = 0`` belongs to segment 0.
The continuity factors ``eta_n`` are always derived, never user-set.

Besides the default bounded form two other bounded shapes are available:
``(1 + d)**-alpha`` and ``min(1, d**-alpha)``.  The latter is flat at 1 for
``d <= 1`` and therefore only non-increasing.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterable, Sequence, Tuple, Union

import numpy as np

from densify.errors import InconsistentRegionsError, InvalidArgumentError, SingularityError

logger = logging.getLogger(__name__)

__all__ = [
    "SPEED_OF_LIGHT",
    "ModelFamily",
    "BoundedForm",
    "Region",
    "FieldRegions",
    "PathlossModel",
    "Band",
    "BANDS",
    "wavelength",
    "field_regions",
    "classify_region",
    "make_model",
    "gain",
    "gain_db",
    "fraunhofer_range",
    "fraunhofer_mismatch",
    "dbm_to_mw",
    "mw_to_dbm",
    "db_to_linear",
    "linear_to_db",
]

SPEED_OF_LIGHT = 2.998e8  # m/s
MAX_EXPONENT = 10.0

Distance = Union[float, np.ndarray]


# --------------------------------------------------------------------------- #
# unit helpers                                                                #
# --------------------------------------------------------------------------- #
def db_to_linear(value_db):
    if np.ndim(value_db):
        return 10.0 ** (np.asarray(value_db, dtype=float) / 10.0)
    return 10.0 ** (value_db / 10.0)


def linear_to_db(value):
    if np.ndim(value):
        return 10.0 * np.log10(np.asarray(value, dtype=float))
    return 10.0 * math.log10(value)


def dbm_to_mw(power_dbm):
    return db_to_linear(power_dbm)


def mw_to_dbm(power_mw):
    return linear_to_db(power_mw)


# --------------------------------------------------------------------------- #
# field regions                                                               #
# --------------------------------------------------------------------------- #
class Region(str, Enum):
    REACTIVE_NEAR_FIELD = "reactive_near_field"
    RADIATIVE_NEAR_FIELD = "radiative_near_field"
    FAR_FIELD_WITHIN_CRITICAL = "far_field_within_critical"
    FAR_FIELD_BEYOND_CRITICAL = "far_field_beyond_critical"


@dataclass(frozen=True)
class FieldRegions:
    wavelength_m: float
    antenna_dimension_m: float
    tx_height_m: float
    rx_height_m: float
    reactive_boundary_m: float
    fraunhofer_m: float
    critical_m: float

    @property
    def is_consistent(self) -> bool:
        return self.reactive_boundary_m < self.fraunhofer_m < self.critical_m

    @property
    def electrically_long(self) -> bool:
        return self.antenna_dimension_m > self.wavelength_m / 2

    def as_dict(self) -> Dict[str, float]:
        return {
            "wavelength_m": self.wavelength_m,
            "antenna_dimension_m": self.antenna_dimension_m,
            "tx_height_m": self.tx_height_m,
            "rx_height_m": self.rx_height_m,
            "reactive_boundary_m": self.reactive_boundary_m,
            "fraunhofer_m": self.fraunhofer_m,
            "critical_m": self.critical_m,
        }


def _require_positive(**values: float) -> None:
    for name, value in values.items():
        if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
            raise InvalidArgumentError(f"{name} must be a positive finite number, got {value!r}")


def wavelength(frequency_hz: float) -> float:
    """Free-space wavelength in metres for a carrier in Hz."""
    _require_positive(frequency_hz=frequency_hz)
    return SPEED_OF_LIGHT / frequency_hz


def field_regions(
    frequency_hz: float,
    antenna_dimension_m: float,
    tx_height_m: float,
    rx_height_m: float,
) -> FieldRegions:
    """Reactive, Fraunhofer and critical boundaries for one configuration."""
    _require_positive(
        antenna_dimension_m=antenna_dimension_m,
        tx_height_m=tx_height_m,
        rx_height_m=rx_height_m,
    )
    lam = wavelength(frequency_hz)
    return FieldRegions(
        wavelength_m=lam,
        antenna_dimension_m=antenna_dimension_m,
        tx_height_m=tx_height_m,
        rx_height_m=rx_height_m,
        reactive_boundary_m=lam / (2 * math.pi),
        fraunhofer_m=2 * antenna_dimension_m**2 / lam,
        critical_m=4 * tx_height_m * rx_height_m / lam,
    )


def classify_region(distance_m: float, regions: FieldRegions) -> Region:
    """Region containing *distance_m*; boundaries belong to the inner region."""
    if not regions.is_consistent:
        raise InconsistentRegionsError(
            "region boundaries must satisfy R_B < R_F < R_C, got "
            f"R_B={regions.reactive_boundary_m:.4g} m, R_F={regions.fraunhofer_m:.4g} m, "
            f"R_C={regions.critical_m:.4g} m"
        )
    if not distance_m >= 0:
        raise InvalidArgumentError(f"distance must be >= 0, got {distance_m!r}")
    if distance_m <= regions.reactive_boundary_m:
        return Region.REACTIVE_NEAR_FIELD
    if distance_m <= regions.fraunhofer_m:
        return Region.RADIATIVE_NEAR_FIELD
    if distance_m <= regions.critical_m:
        return Region.FAR_FIELD_WITHIN_CRITICAL
    return Region.FAR_FIELD_BEYOND_CRITICAL


# --------------------------------------------------------------------------- #
# carrier bands                                                               #
# --------------------------------------------------------------------------- #
@dataclass(frozen=True)
class Band:
    name: str
    low_hz: float
    high_hz: float
    antenna_dimension_m: float
    published_fraunhofer_m: float


BANDS: Dict[str, Band] = {
    "band2": Band("band2", 1.93e9, 1.99e9, 1.5, 29.45),
    "band4": Band("band4", 2.11e9, 2.155e9, 1.0, 13.1),
    "band38": Band("band38", 2.57e9, 2.62e9, 0.5, 3.25),
}

MISMATCH_TOLERANCE_M = 0.5


def fraunhofer_range(band: Band) -> Tuple[float, float]:
    """R_F evaluated at the low and high band edges."""
    low = 2 * band.antenna_dimension_m**2 / wavelength(band.low_hz)
    high = 2 * band.antenna_dimension_m**2 / wavelength(band.high_hz)
    return low, high


def fraunhofer_mismatch(band: Band) -> str | None:
    """Note describing how the published threshold departs from the formula, if it does."""
    low, high = fraunhofer_range(band)
    published = band.published_fraunhofer_m
    if low - MISMATCH_TOLERANCE_M <= published <= high + MISMATCH_TOLERANCE_M:
        return None
    return (
        f"{band.name}: 2D^2/lambda gives {low:.2f}-{high:.2f} m "
        f"but the published threshold is {published:.2f} m"
    )


# --------------------------------------------------------------------------- #
# pathloss models                                                             #
# --------------------------------------------------------------------------- #
class ModelFamily(str, Enum):
    BOUNDED = "bpm"
    UNBOUNDED = "upm"


class BoundedForm(str, Enum):
    ONE_PLUS_POWER = "one_plus_power"        # (1 + d^a)^-1
    ONE_PLUS_DISTANCE = "one_plus_distance"  # (1 + d)^-a
    UNIT_CLAMP = "unit_clamp"                # min(1, d^-a)


def _base_gain(family: ModelFamily, form: BoundedForm, d: np.ndarray, alpha: np.ndarray) -> np.ndarray:
    if family is ModelFamily.UNBOUNDED:
        return d ** (-alpha)
    if form is BoundedForm.ONE_PLUS_POWER:
        return 1.0 / (1.0 + d**alpha)
    if form is BoundedForm.ONE_PLUS_DISTANCE:
        return (1.0 + d) ** (-alpha)
    with np.errstate(divide="ignore"):
        return np.minimum(1.0, d ** (-alpha))


@dataclass(frozen=True)
class PathlossModel:
    family: ModelFamily
    breakpoints_m: Tuple[float, ...]
    exponents: Tuple[float, ...]
    form: BoundedForm = BoundedForm.ONE_PLUS_POWER
    continuity_factors: Tuple[float, ...] = field(init=False)

    def __post_init__(self):
        family = ModelFamily(self.family)
        form = BoundedForm(self.form)
        breakpoints = tuple(float(r) for r in self.breakpoints_m)
        exponents = tuple(float(a) for a in self.exponents)

        if not exponents:
            raise InvalidArgumentError("a pathloss model needs at least one exponent")
        if len(exponents) != len(breakpoints) + 1:
            raise InvalidArgumentError(
                f"expected {len(breakpoints) + 1} exponents for {len(breakpoints)} breakpoints, "
                f"got {len(exponents)}"
            )
        for a in exponents:
            if not (math.isfinite(a) and 0 < a <= MAX_EXPONENT):
                raise InvalidArgumentError(f"exponents must lie in (0, {MAX_EXPONENT:g}], got {a!r}")
        for r in breakpoints:
            if not (math.isfinite(r) and r > 0):
                raise InvalidArgumentError(f"breakpoints must be positive, got {r!r}")
        if any(b <= a for a, b in zip(breakpoints, breakpoints[1:])):
            raise InvalidArgumentError(f"breakpoints must be strictly increasing: {list(breakpoints)}")

        etas = [1.0]
        for n, r in enumerate(breakpoints, start=1):
            r_arr = np.float64(r)
            inner = _base_gain(family, form, r_arr, np.float64(exponents[n - 1]))
            outer = _base_gain(family, form, r_arr, np.float64(exponents[n]))
            etas.append(etas[-1] * float(inner / outer))

        object.__setattr__(self, "family", family)
        object.__setattr__(self, "form", form)
        object.__setattr__(self, "breakpoints_m", breakpoints)
        object.__setattr__(self, "exponents", exponents)
        object.__setattr__(self, "continuity_factors", tuple(etas))

    # ------------------------------------------------------------------ #
    @property
    def slopes(self) -> int:
        return len(self.exponents)

    @property
    def bounded(self) -> bool:
        return self.family is ModelFamily.BOUNDED

    @property
    def max_breakpoint_m(self) -> float:
        return self.breakpoints_m[-1] if self.breakpoints_m else 0.0

    def to_dict(self) -> Dict[str, object]:
        out: Dict[str, object] = {
            "family": self.family.value,
            "breakpoints_m": list(self.breakpoints_m),
            "exponents": list(self.exponents),
        }
        if self.form is not BoundedForm.ONE_PLUS_POWER:
            out["form"] = self.form.value
        return out

    @classmethod
    def from_dict(cls, spec: Dict[str, object]) -> "PathlossModel":
        """Build from ``{"family": "bpm"|"upm", "breakpoints_m": [...], "exponents": [...]}``."""
        if not isinstance(spec, dict):
            raise InvalidArgumentError(f"model specification must be a mapping, got {spec!r}")
        try:
            family = ModelFamily(str(spec.get("family", "")).lower())
        except ValueError:
            raise InvalidArgumentError(f"model family must be 'bpm' or 'upm', got {spec.get('family')!r}") from None
        try:
            form = BoundedForm(spec.get("form", BoundedForm.ONE_PLUS_POWER.value))
        except ValueError:
            raise InvalidArgumentError(f"unknown bounded form {spec.get('form')!r}") from None
        return make_model(family, spec.get("breakpoints_m", []) or [], spec.get("exponents", []) or [], form=form)

    def describe(self) -> str:
        bps = ",".join(f"{r:g}" for r in self.breakpoints_m)
        exps = ",".join(f"{a:g}" for a in self.exponents)
        return f"{self.family.value}[{bps}][{exps}]"


def make_model(
    family: ModelFamily | str,
    breakpoints: Iterable[float],
    exponents: Sequence[float],
    *,
    form: BoundedForm | str = BoundedForm.ONE_PLUS_POWER,
) -> PathlossModel:
    """Validate parameters and derive the continuity factors."""
    try:
        family = ModelFamily(family)
    except ValueError:
        raise InvalidArgumentError(f"unknown model family {family!r}") from None
    return PathlossModel(family, tuple(breakpoints), tuple(exponents), form=BoundedForm(form))


def gain(model: PathlossModel, distance: Distance) -> Distance:
    """Linear power gain at *distance* (scalar or array)."""
    d = np.asarray(distance, dtype=float)
    if np.any(~(d >= 0)):
        raise InvalidArgumentError("distance must be >= 0")
    if not model.bounded and np.any(d == 0):
        raise SingularityError("unbounded pathloss is singular at d = 0")

    seg = np.searchsorted(np.asarray(model.breakpoints_m), d, side="left")
    alpha = np.asarray(model.exponents)[seg]
    eta = np.asarray(model.continuity_factors)[seg]
    with np.errstate(over="ignore"):
        g = eta * _base_gain(model.family, model.form, d, alpha)
    if np.ndim(distance) == 0:
        return float(g)
    return g


def gain_db(model: PathlossModel, distance: Distance) -> Distance:
    return linear_to_db(gain(model, distance))
