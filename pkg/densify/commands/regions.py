"""Propagation-region boundaries for one configuration and the catalogued bands."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List

from densify.commands.base import BaseCommand
from densify.errors import ConfigError
from densify.output.file_sink import format_float
from densify.propagation import BANDS, field_regions, fraunhofer_mismatch, fraunhofer_range

logger = logging.getLogger(__name__)


class RegionsCommand(BaseCommand):
    name = "regions"
    help = "print R_B, R_F and R_C for a carrier/antenna configuration"

    @classmethod
    def add_arguments(cls, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--frequency-hz", type=float, help="carrier frequency in Hz")
        parser.add_argument("--antenna-dimension-m", type=float, help="largest antenna dimension D in m")
        parser.add_argument("--tx-height-m", type=float, help="transmitter height in m")
        parser.add_argument("--rx-height-m", type=float, help="receiver height in m")
        parser.add_argument(
            "--band", action="append", choices=sorted(BANDS), help="catalogued band to check (repeatable)"
        )

    @classmethod
    def overrides(cls, args: argparse.Namespace) -> Dict[str, Any]:
        out: Dict[str, Any] = {}
        for key in ("frequency_hz", "antenna_dimension_m", "tx_height_m", "rx_height_m"):
            value = getattr(args, key, None)
            if value is not None:
                out[key] = value
        if getattr(args, "band", None):
            out["bands"] = list(args.band)
        return out

    def run(self) -> List[Path]:
        b = self.block
        regions = field_regions(b["frequency_hz"], b["antenna_dimension_m"], b["tx_height_m"], b["rx_height_m"])
        for key, value in regions.as_dict().items():
            print(f"{key}: {format_float(value)}", file=sys.stdout)
        if not regions.is_consistent:
            logger.warning("boundaries are not ordered R_B < R_F < R_C for this configuration")

        bands = []
        notes = []
        for name in b.get("bands") or []:
            if name not in BANDS:
                raise ConfigError(f"unknown band {name!r}; choose from {sorted(BANDS)}")
            band = BANDS[name]
            low, high = fraunhofer_range(band)
            mismatch = fraunhofer_mismatch(band)
            if mismatch:
                logger.warning(mismatch)
                notes.append(mismatch)
            print(f"{name}: R_F {format_float(low)} .. {format_float(high)} m", file=sys.stdout)
            bands.append(
                {
                    "band": name,
                    "low_hz": band.low_hz,
                    "high_hz": band.high_hz,
                    "antenna_dimension_m": band.antenna_dimension_m,
                    "fraunhofer_low_m": low,
                    "fraunhofer_high_m": high,
                    "published_m": band.published_fraunhofer_m,
                    "mismatch": mismatch,
                }
            )

        payload = {"regions": regions.as_dict(), "consistent": regions.is_consistent, "bands": bands}
        return [self.sink.write_json("regions", payload, notes=notes)]
