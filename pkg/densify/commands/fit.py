"""Fit pathloss models to measurements and rank them by dB error."""

from __future__ import annotations

import argparse
import logging
from pathlib import Path
from typing import Any, Dict, List

import numpy as np

from densify.commands.base import BaseCommand
from densify.config import density_grid
from densify.errors import ConfigError
from densify.fitting import FitSpec, compare_families, read_measurements_csv, synth_measurements
from densify.propagation import PathlossModel
from densify.seeding import SeedSchedule

logger = logging.getLogger(__name__)


class FitCommand(BaseCommand):
    name = "fit"
    help = "fit bounded/unbounded pathloss models to distance-power data"

    @classmethod
    def add_arguments(cls, parser: argparse.ArgumentParser) -> None:
        parser.add_argument(
            "--input", help="CSV with distance_m,rx_power_dbm[,frequency_hz]; synthetic data when omitted"
        )

    @classmethod
    def overrides(cls, args: argparse.Namespace) -> Dict[str, Any]:
        return {"input": args.input} if getattr(args, "input", None) else {}

    def run(self) -> List[Path]:
        b = self.block
        written: List[Path] = []
        if b.get("input"):
            measurements = read_measurements_csv(b["input"])
            notes = [f"input {Path(b['input']).name}, {len(measurements)} points"]
        else:
            syn = b["synthetic"]
            model = PathlossModel.from_dict(syn["model"])
            distances = density_grid(syn["distances"], "fit.synthetic.distances")
            rng = SeedSchedule(self.seed).stream("synth", 0)
            measurements = synth_measurements(
                model,
                distances,
                tx_power_dbm=float(b["tx_power_dbm"]),
                noise_sigma_db=float(syn["noise_sigma_db"]),
                rng=rng,
                frequency_hz=syn.get("frequency_hz"),
            )
            notes = [f"synthetic data from {model.describe()}, sigma {float(syn['noise_sigma_db']):g} dB"]
            rows = [
                {"distance_m": m.distance_m, "rx_power_dbm": m.rx_power_dbm, "frequency_hz": m.frequency_hz}
                for m in measurements
            ]
            written.append(self.sink.write_table("fit_measurements", rows, notes=notes))

        try:
            specs = [
                FitSpec.from_dict({"tx_power_dbm": b["tx_power_dbm"], "seed": self.seed, **s}) for s in b["specs"]
            ]
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"fit.specs: {exc}") from exc

        ranked = compare_families(measurements, specs)
        for r in ranked:
            logger.info("%-12s rmse %.4f dB  %s", r.spec.label, r.rmse_db, r.model.describe())
        payload = {
            "n_points": len(measurements),
            "distance_span_m": [float(np.min([m.distance_m for m in measurements])),
                                float(np.max([m.distance_m for m in measurements]))],
            "ranking": [r.to_dict() for r in ranked],
        }
        written.append(self.sink.write_json("fit_results", payload, notes=notes))
        return written
