"""Spatial-throughput curves against BS density for a set of pathloss models."""

from __future__ import annotations

import logging
from pathlib import Path
from typing import List

from densify.commands.base import BaseCommand
from densify.config import command_trials, density_grid
from densify.critical_density import fit_scaling_decay
from densify.errors import NumericError
from densify.linklevel import SimConfig, ThroughputPoint, throughput_curve
from densify.propagation import PathlossModel

logger = logging.getLogger(__name__)

MIN_FIT_POINTS = 5


def curve_rows(curve: List[ThroughputPoint]) -> List[dict]:
    return [
        {
            "density_per_km2": p.density_per_km2,
            "coverage": p.coverage.p_hat,
            "std_err": p.coverage.std_err,
            "spatial_throughput_bits_per_s_hz_m2": p.st,
        }
        for p in curve
    ]


class ThroughputCommand(BaseCommand):
    name = "throughput"
    help = "coverage and spatial throughput over a density grid"

    def run(self) -> List[Path]:
        b = self.block
        densities = density_grid(b["densities"], "throughput.densities")
        trials = command_trials(self.cfg, self.name)
        written = []
        for label, spec in b["models"].items():
            model = PathlossModel.from_dict(spec)
            config = SimConfig(
                density_per_km2=densities[0],
                model=model,
                sinr_threshold_db=float(b["sinr_threshold_db"]),
                tx_power_dbm=float(b["tx_power_dbm"]),
                fading=b["fading"],
                trials=trials,
                seed=self.seed,
                include_noise=bool(b["include_noise"]),
                noise_dbm=float(b["noise_dbm"]),
            )
            curve = throughput_curve(config, densities, self.pool)
            notes = [f"model {label}: {model.describe()}"]
            written.append(self.sink.write_table(f"throughput_{label}", curve_rows(curve), notes=notes))

            if b.get("fit_scaling") and len(curve) >= MIN_FIT_POINTS:
                written.append(self._scaling(label, curve))
        return written

    def _scaling(self, label: str, curve: List[ThroughputPoint]) -> Path:
        try:
            fit = fit_scaling_decay([(p.density_per_km2, p.st) for p in curve])
        except NumericError as exc:
            logger.warning("scaling fit for %s failed: %s", label, exc)
            return self.sink.write_json(f"scaling_{label}", {"error": str(exc)})
        payload = {
            "c": fit.c,
            "kappa_per_km2": fit.kappa,
            "rmse_log": fit.rmse,
            "decaying": fit.decaying,
            "peak_density_per_km2": fit.peak_density,
        }
        return self.sink.write_json(f"scaling_{label}", payload)
