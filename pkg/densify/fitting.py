"""
densify.fitting
===============
Least-squares fitting of pathloss models to distance/power measurements.

Residuals live in the dB domain: ``measured - (tx_power_dbm + gain_db)``.
The free parameters are the slope exponents and, unless fixed, the
breakpoints (searched as log10 distances inside the measured range).

Each fit runs scipy's bounded Nelder-Mead from ``multistart`` points spread
over the bound box (log-spaced, Latin-hypercube layout drawn from the
``"fit"`` seed stream) and finishes the best candidate with a compass
search, so no single-coordinate step of 1e-6 relative improves the result.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import polars as pl
from scipy.optimize import minimize
from scipy.stats import qmc

from densify.errors import DegenerateDesignError, InsufficientDataError, InvalidArgumentError
from densify.propagation import MAX_EXPONENT, BoundedForm, ModelFamily, PathlossModel, gain_db, make_model
from densify.seeding import SeedSchedule

logger = logging.getLogger(__name__)

__all__ = [
    "Measurement",
    "FitSpec",
    "FitResult",
    "fit_pathloss",
    "synth_measurements",
    "compare_families",
    "read_measurements_csv",
]

POLISH_STEPS = (1e-3, 1e-4, 1e-5, 1e-6)
POLISH_MAX_MOVES = 10_000
PENALTY = 1e30
NM_OPTIONS = {"xatol": 1e-10, "fatol": 1e-14, "maxiter": 20_000, "maxfev": 40_000}


@dataclass(frozen=True)
class Measurement:
    distance_m: float
    rx_power_dbm: float
    frequency_hz: Optional[float] = None

    def __post_init__(self):
        if not (math.isfinite(self.distance_m) and self.distance_m > 0):
            raise InvalidArgumentError(f"measurement distance must be positive, got {self.distance_m!r}")
        if not math.isfinite(self.rx_power_dbm):
            raise InvalidArgumentError(f"measured power must be finite, got {self.rx_power_dbm!r}")


@dataclass(frozen=True)
class FitSpec:
    family: ModelFamily
    slopes: int = 1
    fixed_breakpoints: Optional[Tuple[float, ...]] = None
    exponent_bounds: Tuple[float, float] = (0.5, 8.0)
    tx_power_dbm: float = 0.0
    multistart: int = 16
    form: BoundedForm = BoundedForm.ONE_PLUS_POWER
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "family", ModelFamily(self.family))
        object.__setattr__(self, "form", BoundedForm(self.form))
        if self.slopes < 1:
            raise InvalidArgumentError(f"slopes must be >= 1, got {self.slopes}")
        if self.multistart < 1:
            raise InvalidArgumentError(f"multistart must be >= 1, got {self.multistart}")
        lo, hi = (float(b) for b in self.exponent_bounds)
        if not 0 < lo < hi <= MAX_EXPONENT:
            raise InvalidArgumentError(f"exponent bounds must satisfy 0 < lo < hi <= {MAX_EXPONENT:g}: {(lo, hi)}")
        object.__setattr__(self, "exponent_bounds", (lo, hi))
        if self.fixed_breakpoints is not None:
            bps = tuple(float(r) for r in self.fixed_breakpoints)
            if len(bps) != self.slopes - 1:
                raise InvalidArgumentError(f"{self.slopes} slopes need {self.slopes - 1} fixed breakpoints, got {len(bps)}")
            object.__setattr__(self, "fixed_breakpoints", bps)

    @property
    def free_breakpoints(self) -> bool:
        return self.fixed_breakpoints is None and self.slopes > 1

    @property
    def free_parameters(self) -> int:
        return self.slopes + (self.slopes - 1 if self.free_breakpoints else 0)

    @property
    def label(self) -> str:
        mode = "free" if self.free_breakpoints else "fixed"
        return f"{self.family.value}-{self.slopes}" + (f"-{mode}" if self.slopes > 1 else "")

    @classmethod
    def from_dict(cls, spec: Dict[str, object]) -> "FitSpec":
        try:
            family = ModelFamily(str(spec.get("family", "")).lower())
        except ValueError:
            raise InvalidArgumentError(f"model family must be 'bpm' or 'upm', got {spec.get('family')!r}") from None
        fixed = spec.get("fixed_breakpoints")
        return cls(
            family=family,
            slopes=int(spec.get("slopes", 1)),
            fixed_breakpoints=None if fixed is None else tuple(fixed),
            exponent_bounds=tuple(spec.get("exponent_bounds", (0.5, 8.0))),
            tx_power_dbm=float(spec.get("tx_power_dbm", 0.0)),
            multistart=int(spec.get("multistart", 16)),
            form=spec.get("form", BoundedForm.ONE_PLUS_POWER.value),
            seed=int(spec.get("seed", 0)),
        )


@dataclass(frozen=True)
class FitResult:
    model: PathlossModel
    rmse_db: float
    per_point_residuals_db: Tuple[float, ...]
    spec: FitSpec
    warnings: Tuple[str, ...] = field(default=(), compare=False)

    def to_dict(self) -> Dict[str, object]:
        model = self.model.to_dict()
        model["continuity_factors"] = list(self.model.continuity_factors)
        return {
            "spec": self.spec.label,
            "tx_power_dbm": self.spec.tx_power_dbm,
            "model": model,
            "rmse_db": self.rmse_db,
            "residuals_db": list(self.per_point_residuals_db),
            "warnings": list(self.warnings),
        }


# --------------------------------------------------------------------------- #
# parameter vector                                                            #
# --------------------------------------------------------------------------- #
class _Problem:
    """Maps a flat parameter vector to a model and its squared dB error."""

    def __init__(self, spec: FitSpec, distances: np.ndarray, measured_dbm: np.ndarray):
        self.spec = spec
        self.distances = distances
        self.measured = measured_dbm
        lo, hi = spec.exponent_bounds
        bounds = [(lo, hi)] * spec.slopes
        if spec.free_breakpoints:
            d_lo, d_hi = math.log10(distances.min()), math.log10(distances.max())
            bounds += [(d_lo, d_hi)] * (spec.slopes - 1)
        self.bounds = bounds

    def model(self, x: np.ndarray) -> Optional[PathlossModel]:
        n = self.spec.slopes
        exponents = [float(a) for a in x[:n]]
        if self.spec.free_breakpoints:
            breakpoints = sorted(10.0 ** float(v) for v in x[n:])
            if any(b <= a for a, b in zip(breakpoints, breakpoints[1:])):
                return None
        else:
            breakpoints = list(self.spec.fixed_breakpoints or ())
        try:
            return make_model(self.spec.family, breakpoints, exponents, form=self.spec.form)
        except InvalidArgumentError:
            return None

    def residuals(self, model: PathlossModel) -> np.ndarray:
        return self.measured - (self.spec.tx_power_dbm + gain_db(model, self.distances))

    def objective(self, x: np.ndarray) -> float:
        model = self.model(x)
        if model is None:
            return PENALTY
        r = self.residuals(model)
        value = float(np.dot(r, r))
        return value if math.isfinite(value) else PENALTY

    def clip(self, x: np.ndarray) -> np.ndarray:
        lo = np.array([b[0] for b in self.bounds])
        hi = np.array([b[1] for b in self.bounds])
        return np.clip(x, lo, hi)

    def starts(self, rng: np.random.Generator) -> np.ndarray:
        """Centre of the box plus a Latin-hypercube layout; exponents log-spaced."""
        k, m = len(self.bounds), self.spec.multistart
        u = np.full((m, k), 0.5)
        if m > 1:
            u[1:] = qmc.LatinHypercube(d=k, seed=rng).random(m - 1)
        points = np.empty_like(u)
        lo, hi = self.spec.exponent_bounds
        n = self.spec.slopes
        points[:, :n] = lo * (hi / lo) ** u[:, :n]
        for j in range(n, k):
            b_lo, b_hi = self.bounds[j]
            points[:, j] = b_lo + u[:, j] * (b_hi - b_lo)
        return points


def _compass_polish(problem: _Problem, x: np.ndarray, fx: float) -> Tuple[np.ndarray, float]:
    x = x.copy()
    for rel in POLISH_STEPS:
        moves = 0
        improved = True
        while improved and moves < POLISH_MAX_MOVES:
            improved = False
            for i in range(len(x)):
                step = rel * max(abs(x[i]), 1.0)
                for direction in (1.0, -1.0):
                    trial = x.copy()
                    trial[i] += direction * step
                    trial = problem.clip(trial)
                    ft = problem.objective(trial)
                    if ft < fx:
                        x, fx = trial, ft
                        improved = True
                        moves += 1
                        break
    return x, fx


# --------------------------------------------------------------------------- #
# public operations                                                           #
# --------------------------------------------------------------------------- #
def fit_pathloss(measurements: Sequence[Measurement], spec: FitSpec) -> FitResult:
    """Best model of *spec*'s shape for *measurements*, by dB-domain least squares."""
    if not measurements:
        raise InsufficientDataError("no measurements to fit")
    distances = np.array([m.distance_m for m in measurements], dtype=float)
    measured = np.array([m.rx_power_dbm for m in measurements], dtype=float)
    if len(distances) > 1 and np.all(distances == distances[0]):
        raise DegenerateDesignError("all measurements share one distance")
    if spec.free_breakpoints and distances.min() == distances.max():
        raise DegenerateDesignError("free breakpoints need measurements at more than one distance")

    warnings: List[str] = []
    if len(distances) < 2 * spec.free_parameters:
        warnings.append(
            f"{len(distances)} measurements for {spec.free_parameters} free parameters "
            f"(at least {2 * spec.free_parameters} recommended)"
        )
    if len(distances) > 1 and distances.max() / distances.min() < 10:
        warnings.append("measured distances span less than one decade")
    for w in warnings:
        logger.warning("%s: %s", spec.label, w)

    problem = _Problem(spec, distances, measured)
    rng = SeedSchedule(spec.seed).stream("fit", 0)
    best_x: Optional[np.ndarray] = None
    best_f = math.inf
    for x0 in problem.starts(rng):
        res = minimize(problem.objective, x0, method="Nelder-Mead", bounds=problem.bounds, options=NM_OPTIONS)
        if res.fun < best_f:
            best_x, best_f = np.asarray(res.x, dtype=float), float(res.fun)
    best_x, best_f = _compass_polish(problem, problem.clip(best_x), best_f)

    model = problem.model(best_x)
    if model is None:
        raise InsufficientDataError(f"{spec.label}: no admissible model found")
    residuals = problem.residuals(model)
    rmse = float(math.sqrt(np.mean(residuals**2)))
    logger.info("fit %s -> %s, rmse %.4g dB", spec.label, model.describe(), rmse)
    return FitResult(model, rmse, tuple(float(r) for r in residuals), spec, tuple(warnings))


def synth_measurements(
    model: PathlossModel,
    distances_m: Sequence[float],
    tx_power_dbm: float = 0.0,
    noise_sigma_db: float = 0.0,
    rng: Optional[np.random.Generator] = None,
    frequency_hz: Optional[float] = None,
) -> List[Measurement]:
    """``tx_power + gain_db + Normal(0, sigma)`` at every distance."""
    d = np.asarray(distances_m, dtype=float)
    if np.any(~(d > 0)):
        raise InvalidArgumentError("distances must be positive")
    if not noise_sigma_db >= 0:
        raise InvalidArgumentError(f"noise sigma must be >= 0, got {noise_sigma_db!r}")
    rx = tx_power_dbm + gain_db(model, d)
    if noise_sigma_db > 0:
        if rng is None:
            raise InvalidArgumentError("a random generator is required when noise_sigma_db > 0")
        rx = rx + rng.normal(0.0, noise_sigma_db, size=len(d))
    return [Measurement(float(di), float(pi), frequency_hz) for di, pi in zip(d, rx)]


def compare_families(measurements: Sequence[Measurement], specs: Sequence[FitSpec]) -> List[FitResult]:
    """Fit every spec and rank by rmse_db, best first."""
    if not specs:
        raise InvalidArgumentError("at least one fit specification is required")
    results = [fit_pathloss(measurements, spec) for spec in specs]
    return sorted(results, key=lambda r: r.rmse_db)


def read_measurements_csv(path: str | Path) -> List[Measurement]:
    """Load ``distance_m,rx_power_dbm[,frequency_hz]`` rows; ``#`` lines are comments."""
    path = Path(path)
    if not path.is_file():
        raise InvalidArgumentError(f"measurement file not found: {path}")
    try:
        df = pl.read_csv(path, comment_prefix="#")
    except (pl.exceptions.ComputeError, pl.exceptions.NoDataError) as exc:
        raise InvalidArgumentError(f"cannot parse {path}: {exc}") from exc
    missing = {"distance_m", "rx_power_dbm"} - set(df.columns)
    if missing:
        raise InvalidArgumentError(f"{path}: missing column(s) {sorted(missing)}")
    freq = df["frequency_hz"].to_list() if "frequency_hz" in df.columns else [None] * df.height
    return [
        Measurement(float(d), float(p), None if f is None else float(f))
        for d, p, f in zip(df["distance_m"].to_list(), df["rx_power_dbm"].to_list(), freq)
    ]
