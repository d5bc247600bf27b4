"""Throughput under SIC, IA and ICA decoding, plus the five-interferer walk-through."""

from __future__ import annotations

import logging
from pathlib import Path
from typing import List

from densify.commands.base import BaseCommand
from densify.config import command_trials, density_grid
from densify.critical_density import find_critical_density
from densify.errors import ConfigError, CriticalDensityBoundaryError
from densify.linklevel import SimConfig
from densify.mitigation import (
    DecodingOutcome,
    Strategy,
    StrategyKind,
    ia_decode,
    ica_decode,
    relative_gain,
    sic_decode,
    strategy_objective,
    strategy_throughput_curve,
    worked_example_profile,
)
from densify.propagation import PathlossModel

logger = logging.getLogger(__name__)

PUBLISHED_ICA_OVER_IA = 0.13
EXAMPLE_THRESHOLD = 1.0
EXAMPLE_BUDGET = 2


def outcome_dict(outcome: DecodingOutcome) -> dict:
    return {
        "cancelled": sorted(outcome.cancelled),
        "ia_assigned": sorted(outcome.ia_assigned),
        "residual_sinr": outcome.residual_sinr,
        "trace": outcome.trace_json(),
    }


class MitigationCommand(BaseCommand):
    name = "mitigation"
    help = "spatial throughput per interference-management strategy"

    def run(self) -> List[Path]:
        b = self.block
        try:
            strategies = [Strategy.parse(s) for s in b["strategies"]]
        except ValueError as exc:
            raise ConfigError(f"mitigation.strategies: {exc}") from exc
        config = SimConfig(
            density_per_km2=1.0,
            model=PathlossModel.from_dict(b["model"]),
            sinr_threshold_db=float(b["sinr_threshold_db"]),
            tx_power_dbm=float(b["tx_power_dbm"]),
            include_noise=bool(b["include_noise"]),
            noise_dbm=float(b["noise_dbm"]),
            trials=command_trials(self.cfg, self.name),
            seed=self.seed,
        )
        densities = density_grid(b["densities"], "mitigation.densities")
        curves = strategy_throughput_curve(config, strategies, densities, self.pool)

        rows = []
        for name, curve in curves.items():
            for p in curve:
                rows.append(
                    {
                        "density_per_km2": p.density_per_km2,
                        "strategy": name,
                        "coverage": p.coverage.p_hat,
                        "std_err": p.coverage.std_err,
                        "spatial_throughput": p.st,
                    }
                )

        notes = [
            f"model {config.model.describe()}, tau {config.sinr_threshold_db:g} dB, noise ratio {config.noise_ratio:.3g}"
        ]
        ica, ia, sic = StrategyKind.ICA.value, StrategyKind.IA.value, StrategyKind.SIC.value
        if ica in curves and ia in curves:
            gain = relative_gain(curves[ica], curves[ia])
            notes.append(f"mean ICA gain over IA {100 * gain:.1f}% (published {100 * PUBLISHED_ICA_OVER_IA:.0f}%)")
        if ica in curves and sic in curves:
            notes.append(f"mean ICA gain over SIC {100 * relative_gain(curves[ica], curves[sic]):.1f}%")
        for note in notes[1:]:
            logger.info(note)

        written = [self.sink.write_table("mitigation_curves", rows, notes=notes)]
        if b.get("critical"):
            written.append(self._critical(config, strategies, b["critical"]))
        if b.get("worked_example", True):
            written.append(self._worked_example())
        return written

    def _critical(self, config: SimConfig, strategies: List[Strategy], bounds: dict) -> Path:
        mu_min, mu_max = float(bounds["mu_min"]), float(bounds["mu_max"])
        rows, notes = [], [f"search interval [{mu_min:g}, {mu_max:g}]/km2"]
        for strategy in strategies:
            objective = strategy_objective(config, strategy, self.pool)
            try:
                found = find_critical_density(config, mu_min, mu_max, objective=objective, pool=self.pool)
            except CriticalDensityBoundaryError as exc:
                logger.warning("%s: %s", strategy.name, exc)
                notes.append(f"{strategy.name}: {exc}")
                continue
            rows.append(
                {
                    "strategy": strategy.name,
                    "mu_star_per_km2": found.mu_star_per_km2,
                    "st_star": found.st_star,
                    "bracket_width": found.tolerance,
                }
            )
        return self.sink.write_table("mitigation_critical_density", rows, notes=notes)

    def _worked_example(self) -> Path:
        profile = worked_example_profile()
        payload = {
            "profile": {
                "desired_power": profile.desired_power,
                "interferer_powers": list(profile.interferer_powers),
            },
            "decode_threshold": EXAMPLE_THRESHOLD,
            "budget": EXAMPLE_BUDGET,
            "sic": outcome_dict(sic_decode(profile, EXAMPLE_THRESHOLD)),
            "ia": outcome_dict(ia_decode(profile, EXAMPLE_BUDGET)),
            "ica": outcome_dict(ica_decode(profile, EXAMPLE_THRESHOLD, EXAMPLE_BUDGET)),
        }
        return self.sink.write_json("mitigation_worked_example", payload)
