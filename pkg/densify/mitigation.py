"""
densify.mitigation
==================
Interference mitigation as decoding procedures over a received-signal
profile.

* **SIC** walks interferers strongest-first and cancels one when its power
  over (desired + every not-yet-removed weaker interferer + noise) reaches
  the decoding threshold; the walk stops at the first failure.
* **IA** removes the ``budget`` strongest interferers outright (ideal, cost
  free alignment, one cluster per receiver).
* **ICA** walks like SIC, but an interferer that stalls the chain is
  aligned away while IA budget remains, and the walk continues.

All three strategies remove a strongest-first prefix of the sorted profile,
so the remaining interference before step *k* is the suffix sum after *k*.
Sorting is stable: equal powers keep their original order.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

import numpy as np

from densify.critical_density import Objective
from densify.errors import InvalidArgumentError, SingularityError
from densify.estimates import CoverageEstimate
from densify.linklevel import SimConfig, ThroughputPoint, draw_network, spatial_throughput
from densify.pool import TrialPool, resolve
from densify.propagation import gain
from densify.seeding import SeedSchedule

logger = logging.getLogger(__name__)

__all__ = [
    "SignalProfile",
    "StrategyKind",
    "Strategy",
    "Decision",
    "DecodingOutcome",
    "sic_decode",
    "ia_decode",
    "ica_decode",
    "decode",
    "strategy_coverage",
    "strategy_throughput_curve",
    "strategy_objective",
    "relative_gain",
    "worked_example_profile",
]


@dataclass(frozen=True)
class SignalProfile:
    desired_power: float
    interferer_powers: Tuple[float, ...]
    noise_power: float = 0.0

    def __post_init__(self):
        powers = tuple(float(p) for p in self.interferer_powers)
        if not self.desired_power > 0:
            raise InvalidArgumentError(f"desired power must be positive, got {self.desired_power!r}")
        if any(not p > 0 for p in powers):
            raise InvalidArgumentError("interferer powers must be positive")
        if not self.noise_power >= 0:
            raise InvalidArgumentError(f"noise power must be >= 0, got {self.noise_power!r}")
        object.__setattr__(self, "interferer_powers", powers)


class StrategyKind(str, Enum):
    NONE = "none"
    SIC = "sic"
    IA = "ia"
    ICA = "ica"


@dataclass(frozen=True)
class Strategy:
    kind: StrategyKind
    budget: int = 0
    decode_threshold: Optional[float] = None  # linear; None → coverage threshold
    max_sic_stages: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "kind", StrategyKind(self.kind))
        if self.budget < 0:
            raise InvalidArgumentError(f"IA budget must be >= 0, got {self.budget}")
        if self.max_sic_stages is not None and self.max_sic_stages < 0:
            raise InvalidArgumentError("max_sic_stages must be >= 0")

    @property
    def name(self) -> str:
        return self.kind.value

    @classmethod
    def parse(cls, spec: Dict[str, object]) -> "Strategy":
        try:
            kind = StrategyKind(str(spec.get("kind", "")).lower())
        except ValueError:
            raise InvalidArgumentError(f"unknown strategy {spec.get('kind')!r}") from None
        threshold_db = spec.get("decode_threshold_db")
        return cls(
            kind=kind,
            budget=int(spec.get("budget", 0)),
            decode_threshold=None if threshold_db is None else 10 ** (float(threshold_db) / 10),
            max_sic_stages=spec.get("max_sic_stages"),
        )


@dataclass(frozen=True)
class Decision:
    index: int
    power: float
    action: str  # "SIC" | "IA" | "STOP"


@dataclass(frozen=True)
class DecodingOutcome:
    cancelled: FrozenSet[int]
    ia_assigned: FrozenSet[int]
    residual_sinr: float
    trace: Tuple[Decision, ...] = field(default=(), compare=False)

    def trace_json(self) -> List[Dict[str, object]]:
        return [{"interferer": d.index, "power": d.power, "action": d.action} for d in self.trace]


# --------------------------------------------------------------------------- #
# decoding                                                                    #
# --------------------------------------------------------------------------- #
def _sorted_view(profile: SignalProfile) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    powers = np.asarray(profile.interferer_powers, dtype=float)
    order = np.argsort(-powers, kind="stable")
    ranked = powers[order]
    # after[k] = sum of ranked[k+1:]
    after = np.concatenate((np.cumsum(ranked[::-1])[::-1][1:], [0.0])) if len(ranked) else ranked
    return order, ranked, after


def _residual(profile: SignalProfile, cancelled: FrozenSet[int]) -> float:
    powers = np.asarray(profile.interferer_powers, dtype=float)
    keep = np.ones(len(powers), dtype=bool)
    keep[list(cancelled)] = False
    denominator = float(np.sum(powers[keep])) + profile.noise_power
    if denominator == 0.0:
        return math.inf
    return profile.desired_power / denominator


def _walk(
    profile: SignalProfile,
    tau_dec: float,
    budget: int,
    max_sic_stages: Optional[int] = None,
) -> DecodingOutcome:
    order, ranked, after = _sorted_view(profile)
    cancelled: List[int] = []
    aligned: List[int] = []
    trace: List[Decision] = []
    sic_stages = 0
    for k, idx in enumerate(order):
        idx = int(idx)
        power = float(ranked[k])
        sic_allowed = max_sic_stages is None or sic_stages < max_sic_stages
        if sic_allowed and power / (profile.desired_power + after[k] + profile.noise_power) >= tau_dec:
            cancelled.append(idx)
            sic_stages += 1
            trace.append(Decision(idx, power, "SIC"))
        elif len(aligned) < budget:
            cancelled.append(idx)
            aligned.append(idx)
            trace.append(Decision(idx, power, "IA"))
        else:
            trace.append(Decision(idx, power, "STOP"))
            break
    done = frozenset(cancelled)
    return DecodingOutcome(done, frozenset(aligned), _residual(profile, done), tuple(trace))


def sic_decode(profile: SignalProfile, tau_dec: float, *, max_sic_stages: Optional[int] = None) -> DecodingOutcome:
    return _walk(profile, tau_dec, budget=0, max_sic_stages=max_sic_stages)


def ia_decode(profile: SignalProfile, budget: int) -> DecodingOutcome:
    if budget < 0:
        raise InvalidArgumentError(f"IA budget must be >= 0, got {budget}")
    order, ranked, _ = _sorted_view(profile)
    chosen = [int(i) for i in order[:budget]]
    trace = tuple(Decision(i, float(p), "IA") for i, p in zip(chosen, ranked[:budget]))
    done = frozenset(chosen)
    return DecodingOutcome(done, done, _residual(profile, done), trace)


def ica_decode(
    profile: SignalProfile,
    tau_dec: float,
    budget: int,
    *,
    max_sic_stages: Optional[int] = None,
) -> DecodingOutcome:
    if budget < 0:
        raise InvalidArgumentError(f"IA budget must be >= 0, got {budget}")
    return _walk(profile, tau_dec, budget, max_sic_stages)


def decode(profile: SignalProfile, strategy: Strategy, tau_dec: float) -> DecodingOutcome:
    """Apply *strategy*; ``strategy.decode_threshold`` overrides *tau_dec* when set."""
    threshold = tau_dec if strategy.decode_threshold is None else strategy.decode_threshold
    if strategy.kind is StrategyKind.SIC:
        return sic_decode(profile, threshold, max_sic_stages=strategy.max_sic_stages)
    if strategy.kind is StrategyKind.IA:
        return ia_decode(profile, strategy.budget)
    if strategy.kind is StrategyKind.ICA:
        return ica_decode(profile, threshold, strategy.budget, max_sic_stages=strategy.max_sic_stages)
    return DecodingOutcome(frozenset(), frozenset(), _residual(profile, frozenset()))


def worked_example_profile() -> SignalProfile:
    """Five interferers where only the strongest survives plain SIC."""
    return SignalProfile(1.0, (20.0, 6.0, 4.0, 1.5, 1.2))


# --------------------------------------------------------------------------- #
# network-level evaluation                                                    #
# --------------------------------------------------------------------------- #
def _profile_from_network(config: SimConfig, distances: np.ndarray, fades: np.ndarray) -> SignalProfile:
    received = gain(config.model, distances) * fades
    serving = int(np.argmin(distances))
    interferers = np.delete(received, serving)
    return SignalProfile(float(received[serving]), tuple(interferers), config.noise_ratio)


def strategy_coverage(
    config: SimConfig,
    strategy: Strategy,
    pool: Optional[TrialPool] = None,
) -> CoverageEstimate:
    """Coverage when every typed user decodes with *strategy*; same streams as link-level coverage."""
    if config.trials < 100:
        raise InvalidArgumentError(f"coverage needs >= 100 trials, got {config.trials}")
    schedule = SeedSchedule(config.seed)
    tau = config.threshold_linear

    def _success(t: int) -> bool:
        rng = schedule.stream(config.tag, t)
        distances, fades = draw_network(config, rng)
        try:
            profile = _profile_from_network(config, distances, fades)
        except SingularityError:
            distances, fades = draw_network(config, rng)
            profile = _profile_from_network(config, distances, fades)
        return decode(profile, strategy, tau).residual_sinr > tau

    def _chunk(start: int, stop: int) -> int:
        return sum(int(_success(t)) for t in range(start, stop))

    hits = sum(resolve(pool).map_chunks(_chunk, config.trials))
    return CoverageEstimate.from_counts(hits, config.trials)


def strategy_throughput_curve(
    config: SimConfig,
    strategies: Sequence[Strategy],
    densities_per_km2: Sequence[float],
    pool: Optional[TrialPool] = None,
) -> Dict[str, List[ThroughputPoint]]:
    if not strategies:
        raise InvalidArgumentError("at least one strategy is required")
    if not len(densities_per_km2):
        raise InvalidArgumentError("density list must be non-empty")
    curves: Dict[str, List[ThroughputPoint]] = {}
    for strategy in strategies:
        points = []
        for mu in densities_per_km2:
            cov = strategy_coverage(config.with_density(float(mu)), strategy, pool)
            points.append(spatial_throughput(mu, cov, config.sinr_threshold_db))
        curves[strategy.name] = points
        logger.info("strategy %s: %d densities", strategy.name, len(points))
    return curves


def strategy_objective(config: SimConfig, strategy: Strategy, pool: Optional[TrialPool] = None) -> Objective:
    """Spatial throughput under *strategy*, shaped for ``critical_density.find_critical_density``."""

    def _objective(mu_km2: float, trials: int) -> Tuple[float, float]:
        cfg = replace(config, density_per_km2=mu_km2, trials=trials)
        point = spatial_throughput(mu_km2, strategy_coverage(cfg, strategy, pool), cfg.sinr_threshold_db)
        return point.st, point.st_std_err

    return _objective


def relative_gain(curve: Sequence[ThroughputPoint], baseline: Sequence[ThroughputPoint]) -> float:
    """Mean of st/st_baseline - 1 over densities where the baseline is positive."""
    ratios = [a.st / b.st - 1 for a, b in zip(curve, baseline) if b.st > 0]
    return float(np.mean(ratios)) if ratios else math.nan
