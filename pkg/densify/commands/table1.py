"""Link-distance probabilities under nearest-point association."""

from __future__ import annotations

import logging
from pathlib import Path
from typing import List

from densify.commands.base import BaseCommand
from densify.geometry import KM2, empirical_link_cdf, flag_errata, table1
from densify.seeding import SeedSchedule

logger = logging.getLogger(__name__)


def threshold_column(threshold_m: float) -> str:
    return f"p_d_lt_{threshold_m:g}m"


class Table1Command(BaseCommand):
    name = "table1"
    help = "mean link length and P(d < r) per density"

    def run(self) -> List[Path]:
        densities = [float(v) for v in self.block["densities_per_km2"]]
        thresholds = [float(v) for v in self.block["thresholds_m"]]
        rows = table1(densities, thresholds)
        notes = flag_errata(rows)
        for note in notes:
            logger.warning(note)

        records = []
        for row in rows:
            record = {"density_per_km2": row.density_per_km2, "mean_link_m": row.mean_link_m}
            for t, p in zip(row.thresholds_m, row.probabilities):
                record[threshold_column(t)] = p
            records.append(record)
        written = [self.sink.write_table("table1", records, notes=notes)]

        trials = int(self.cfg["run"].get("trials") or self.block.get("empirical_trials") or 0)
        if trials:
            written.append(self._empirical(rows, trials))
        return written

    def _empirical(self, rows, trials: int) -> Path:
        schedule = SeedSchedule(self.seed)
        records = []
        for row in rows:
            for t, p in zip(row.thresholds_m, row.probabilities):
                est = empirical_link_cdf(row.density_per_km2 * KM2, t, trials, schedule, pool=self.pool)
                records.append(
                    {
                        "density_per_km2": row.density_per_km2,
                        "threshold_m": t,
                        "analytic": p,
                        "empirical": est.p_hat,
                        "std_err": est.std_err,
                        "trials": est.trials,
                    }
                )
        logger.info("empirical link CDF: %d cells at %d trials", len(records), trials)
        return self.sink.write_table("table1_empirical", records)
