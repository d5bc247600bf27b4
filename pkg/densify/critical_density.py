"""
densify.critical_density
========================
Search for the throughput-maximising BS density and fit the
``mu * exp(-kappa * mu)`` scaling law.

Search stages
-------------
1. 13-point log grid over ``[mu_min, mu_max]``.
2. 9-point log grid spanning one coarse step either side of the coarse argmax.
3. Golden-section search (log domain) on the refined bracket, with trials
   quadrupled, until the bracket's relative width reaches ``tolerance``.

All evaluations of one search share the seed schedule, so differences
between them follow density rather than sampling noise.  The returned
density is the best evaluation of the whole trace.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from densify.errors import CriticalDensityBoundaryError, InsufficientDataError, InvalidArgumentError
from densify.linklevel import SimConfig, coverage_probability, spatial_throughput
from densify.pool import TrialPool
from densify.propagation import ModelFamily, make_model

logger = logging.getLogger(__name__)

COARSE_POINTS = 13
REFINED_POINTS = 9
GOLDEN_TRIAL_FACTOR = 4
DEFAULT_TOLERANCE = 0.05
MAX_GOLDEN_ITERATIONS = 60
NOISE_SIGMAS = 3.0
INV_PHI = (math.sqrt(5) - 1) / 2

# (st, std_err) for a density per km² evaluated with a given trial count
Objective = Callable[[float, int], Tuple[float, float]]

# published critical densities per km², keyed by (tau dB, alpha_1); alpha_0 = 2
REFERENCE_CRITICAL_DENSITY: Dict[Tuple[float, float], float] = {
    (0.0, 3.0): 2.0e5, (0.0, 3.5): 2.51e5, (0.0, 4.0): 3.16e5,
    (5.0, 3.0): 7.94e4, (5.0, 3.5): 1.26e5, (5.0, 4.0): 1.59e5,
    (10.0, 3.0): 3.16e4, (10.0, 3.5): 6.31e4, (10.0, 4.0): 7.94e4,
    (15.0, 3.0): 1.58e4, (15.0, 3.5): 3.16e4, (15.0, 4.0): 5.01e4,
    (20.0, 3.0): 6.3e3, (20.0, 3.5): 1.58e4, (20.0, 4.0): 2.51e4,
}


@dataclass
class CriticalDensityResult:
    mu_star_per_km2: float
    st_star: float
    search_trace: List[Tuple[float, float]]
    tolerance: float
    warnings: List[str] = field(default_factory=list)


@dataclass(frozen=True)
class ScalingFit:
    c: float
    kappa: float
    rmse: float

    @property
    def decaying(self) -> bool:
        return self.kappa > 0

    @property
    def peak_density(self) -> float:
        """Maximiser 1/kappa of c·mu·exp(-kappa·mu)."""
        return 1.0 / self.kappa if self.kappa > 0 else math.inf


def monte_carlo_objective(config: SimConfig, pool: Optional[TrialPool] = None) -> Objective:
    """Spatial throughput of *config* at a given density and trial count."""

    def _objective(mu_km2: float, trials: int) -> Tuple[float, float]:
        cfg = replace(config, density_per_km2=mu_km2, trials=trials)
        point = spatial_throughput(mu_km2, coverage_probability(cfg, pool), cfg.sinr_threshold_db)
        return point.st, point.st_std_err

    return _objective


# --------------------------------------------------------------------------- #
# search                                                                      #
# --------------------------------------------------------------------------- #
def find_critical_density(
    config: Optional[SimConfig],
    mu_min: float,
    mu_max: float,
    *,
    pool: Optional[TrialPool] = None,
    objective: Optional[Objective] = None,
    tolerance: float = DEFAULT_TOLERANCE,
) -> CriticalDensityResult:
    """Density maximising spatial throughput inside ``(mu_min, mu_max)`` (per km²)."""
    if not (0 < mu_min < mu_max):
        raise InvalidArgumentError(f"need 0 < mu_min < mu_max, got {mu_min!r}, {mu_max!r}")
    if not 0 < tolerance <= 0.15:
        raise InvalidArgumentError(f"tolerance must lie in (0, 0.15], got {tolerance!r}")
    if objective is None:
        if config is None:
            raise InvalidArgumentError("either a config or an objective is required")
        objective = monte_carlo_objective(config, pool)
    base_trials = config.trials if config is not None else 1

    trace: List[Tuple[float, float]] = []
    warnings: List[str] = []

    def evaluate(mu: float, trials: int) -> Tuple[float, float]:
        st, se = objective(mu, trials)
        trace.append((mu, st))
        logger.debug("evaluated mu=%.4g st=%.4g ± %.2g", mu, st, se)
        return st, se

    # ---- stage 1: coarse grid ------------------------------------------ #
    coarse = np.logspace(math.log10(mu_min), math.log10(mu_max), COARSE_POINTS)
    coarse_vals = [evaluate(mu, base_trials) for mu in coarse]
    i = int(np.argmax([st for st, _ in coarse_vals]))
    if i in (0, COARSE_POINTS - 1):
        raise CriticalDensityBoundaryError(
            f"throughput peaks at the interval edge ({coarse[i]:.4g}/km2); widen [{mu_min:.4g}, {mu_max:.4g}]",
            trace,
        )
    warning = _unimodality_warning(coarse, coarse_vals, i)
    if warning:
        logger.warning(warning)
        warnings.append(warning)
    logger.info("coarse argmax %.4g/km2", coarse[i])

    # ---- stage 2: refined grid ----------------------------------------- #
    refined = np.logspace(math.log10(coarse[i - 1]), math.log10(coarse[i + 1]), REFINED_POINTS)
    refined_st = [evaluate(mu, base_trials)[0] for mu in refined]
    j = int(np.argmax(refined_st))
    lo = math.log10(refined[max(j - 1, 0)])
    hi = math.log10(refined[min(j + 1, REFINED_POINTS - 1)])
    logger.info("refined bracket [%.4g, %.4g]/km2", 10**lo, 10**hi)

    # ---- stage 3: golden section (log domain) -------------------------- #
    trials = base_trials * GOLDEN_TRIAL_FACTOR
    c = hi - INV_PHI * (hi - lo)
    d = lo + INV_PHI * (hi - lo)
    fc = evaluate(10**c, trials)[0]
    fd = evaluate(10**d, trials)[0]
    for _ in range(MAX_GOLDEN_ITERATIONS):
        if 10 ** (hi - lo) - 1 <= tolerance:
            break
        if fc >= fd:
            hi, d, fd = d, c, fc
            c = hi - INV_PHI * (hi - lo)
            fc = evaluate(10**c, trials)[0]
        else:
            lo, c, fc = c, d, fd
            d = lo + INV_PHI * (hi - lo)
            fd = evaluate(10**d, trials)[0]
    width = 10 ** (hi - lo) - 1

    mu_star, st_star = max(trace, key=lambda p: p[1])
    logger.info("critical density %.4g/km2 (st %.4g, bracket width %.1f%%)", mu_star, st_star, 100 * width)
    return CriticalDensityResult(
        mu_star_per_km2=float(mu_star),
        st_star=float(st_star),
        search_trace=trace,
        tolerance=width,
        warnings=warnings,
    )


def _unimodality_warning(grid: np.ndarray, values: Sequence[Tuple[float, float]], peak: int) -> Optional[str]:
    for k in range(len(values) - 1):
        (a, sa), (b, sb) = values[k], values[k + 1]
        slack = NOISE_SIGMAS * (sa + sb)
        rising_after_peak = k >= peak and b > a + slack
        falling_before_peak = k < peak and a > b + slack
        if rising_after_peak or falling_before_peak:
            return f"throughput is not unimodal between {grid[k]:.4g} and {grid[k + 1]:.4g}/km2"
    return None


# --------------------------------------------------------------------------- #
# scaling law                                                                 #
# --------------------------------------------------------------------------- #
def fit_scaling_decay(curve: Sequence[Tuple[float, float]]) -> ScalingFit:
    """Least-squares fit of log(st/mu) = log c - kappa·mu over points with st > 0."""
    if len(curve) < 5:
        raise InvalidArgumentError(f"need at least 5 curve points, got {len(curve)}")
    pts = np.asarray(curve, dtype=float)
    if np.any(pts[:, 1] < 0):
        raise InvalidArgumentError("spatial throughput values must be non-negative")
    pts = pts[pts[:, 1] > 0]
    if len(pts) < 2:
        raise InsufficientDataError("fewer than two positive throughput points")

    mu, st = pts[:, 0], pts[:, 1]
    scale = mu.max()
    design = np.column_stack((np.ones_like(mu), -mu / scale))
    target = np.log(st / mu)
    coef, *_ = np.linalg.lstsq(design, target, rcond=None)
    residuals = target - design @ coef
    fit = ScalingFit(
        c=float(math.exp(coef[0])),
        kappa=float(coef[1] / scale),
        rmse=float(math.sqrt(np.mean(residuals**2))),
    )
    if not fit.decaying:
        logger.warning("scaling fit is non-decaying (kappa=%.3g)", fit.kappa)
    return fit


# --------------------------------------------------------------------------- #
# critical-density table                                                      #
# --------------------------------------------------------------------------- #
@dataclass
class Table2Result:
    taus_db: List[float]
    alpha1s: List[float]
    cells: Dict[Tuple[float, float], CriticalDensityResult]
    errors: Dict[Tuple[float, float], str]

    def mu_star(self, tau_db: float, alpha1: float) -> float:
        cell = self.cells.get((tau_db, alpha1))
        return cell.mu_star_per_km2 if cell else math.nan


def table2(
    tau_list_db: Sequence[float],
    alpha1_list: Sequence[float],
    base: SimConfig,
    *,
    alpha0: float = 2.0,
    breakpoint_m: float = 1.0,
    mu_min: float = 1e2,
    mu_max: float = 1e7,
    tolerance: float = DEFAULT_TOLERANCE,
    pool: Optional[TrialPool] = None,
) -> Table2Result:
    """Critical density for every (tau, alpha_1) pair under a dual-slope bounded model."""
    if not tau_list_db or not alpha1_list:
        raise InvalidArgumentError("tau and alpha_1 lists must be non-empty")
    cells: Dict[Tuple[float, float], CriticalDensityResult] = {}
    errors: Dict[Tuple[float, float], str] = {}
    for tau in tau_list_db:
        for a1 in alpha1_list:
            model = make_model(ModelFamily.BOUNDED, [breakpoint_m], [alpha0, a1], form=base.model.form)
            cfg = replace(base, model=model, sinr_threshold_db=float(tau))
            try:
                cells[(tau, a1)] = find_critical_density(cfg, mu_min, mu_max, pool=pool, tolerance=tolerance)
            except CriticalDensityBoundaryError as exc:
                logger.warning("tau=%g dB alpha1=%g: %s", tau, a1, exc)
                errors[(tau, a1)] = str(exc)
    return Table2Result(list(tau_list_db), list(alpha1_list), cells, errors)


def trend_violations(result: Table2Result) -> List[str]:
    """Adjacent pairs breaking 'mu* down in tau' or 'mu* up in alpha_1' beyond one bracket width."""
    out = []
    for a1 in result.alpha1s:
        for t0, t1 in zip(result.taus_db, result.taus_db[1:]):
            low, high = result.cells.get((t0, a1)), result.cells.get((t1, a1))
            if low and high and high.mu_star_per_km2 > low.mu_star_per_km2 * (1 + max(low.tolerance, high.tolerance)):
                out.append(f"alpha1={a1:g}: mu* rises from tau={t0:g} to tau={t1:g} dB")
    for tau in result.taus_db:
        for a0, a1 in zip(result.alpha1s, result.alpha1s[1:]):
            low, high = result.cells.get((tau, a0)), result.cells.get((tau, a1))
            if low and high and high.mu_star_per_km2 * (1 + max(low.tolerance, high.tolerance)) < low.mu_star_per_km2:
                out.append(f"tau={tau:g} dB: mu* falls from alpha1={a0:g} to alpha1={a1:g}")
    return out
