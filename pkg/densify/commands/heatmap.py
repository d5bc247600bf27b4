"""Aggregate interference rasters over a grid deployment."""

from __future__ import annotations

import itertools
import logging
from pathlib import Path
from typing import Dict, List

from densify.commands.base import BaseCommand
from densify.interference_field import (
    HeatmapConfig,
    Raster,
    field_stats,
    interference_field,
    rank_correlation,
    upper_bound_dbm,
)
from densify.output.file_sink import format_float
from densify.propagation import PathlossModel

logger = logging.getLogger(__name__)


class HeatmapCommand(BaseCommand):
    name = "heatmap"
    help = "interference-power rasters (CSV matrix + 16-bit PGM)"

    def run(self) -> List[Path]:
        b = self.block
        written: List[Path] = []
        stats_rows = []
        corr_rows = []
        for density in [float(v) for v in b["densities_per_km2"]]:
            rasters: Dict[str, Raster] = {}
            for label, spec in b["models"].items():
                config = HeatmapConfig(
                    tx_density_per_km2=density,
                    model=PathlossModel.from_dict(spec),
                    side_m=float(b["side_m"]),
                    guard_m=float(b["guard_m"]),
                    resolution=int(b["resolution"]),
                    tx_power_dbm=float(b["tx_power_dbm"]),
                    fading=b["fading"],
                    seed=self.seed,
                )
                raster = interference_field(config, self.pool)
                rasters[label] = raster
                stats = field_stats(raster)
                lo, hi = raster.limits
                notes = [
                    f"model {label}: {config.model.describe()}",
                    f"density {density:g}/km2, {len(raster.tx_positions)} Tx, side {config.side_m:g} m",
                    f"limits {format_float(lo)} .. {format_float(hi)} dBm",
                ]
                stem = f"heatmap_{label}_{density:g}"
                written.append(self.sink.write_matrix(stem, raster.values_dbm, notes=notes))
                written.append(self.sink.write_pgm(stem, raster.values_dbm, notes=notes))
                stats_rows.append(
                    {
                        "density_per_km2": density,
                        "model": label,
                        "n_tx": len(raster.tx_positions),
                        "min_dbm": stats.min,
                        "max_dbm": stats.max,
                        "p1_dbm": stats.p1,
                        "p50_dbm": stats.p50,
                        "p99_dbm": stats.p99,
                        "dynamic_range_db": stats.dynamic_range_db,
                        "bound_dbm": upper_bound_dbm(config, raster) if config.model.bounded else None,
                    }
                )
            for a, b_label in itertools.combinations(rasters, 2):
                rho = rank_correlation(rasters[a], rasters[b_label])
                corr_rows.append({"density_per_km2": density, "model_a": a, "model_b": b_label, "spearman": rho})
                logger.info("density %g: spearman(%s, %s) = %.4f", density, a, b_label, rho)

        written.append(self.sink.write_table("heatmap_stats", stats_rows))
        if corr_rows:
            written.append(self.sink.write_table("heatmap_rank_correlation", corr_rows))
        return written
