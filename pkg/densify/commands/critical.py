"""Critical-density matrix over SINR thresholds and far-field exponents."""

from __future__ import annotations

import logging
from pathlib import Path
from typing import List

from densify.commands.base import BaseCommand
from densify.config import command_trials
from densify.critical_density import REFERENCE_CRITICAL_DENSITY, table2, trend_violations
from densify.linklevel import SimConfig
from densify.propagation import ModelFamily, make_model

logger = logging.getLogger(__name__)


def alpha_column(alpha1: float) -> str:
    return f"alpha1_{alpha1:g}"


class CriticalCommand(BaseCommand):
    name = "critical"
    help = "critical BS density for every (tau, alpha_1) pair"

    def run(self) -> List[Path]:
        b = self.block
        trials = command_trials(self.cfg, self.name)
        taus = [float(v) for v in b["taus_db"]]
        alpha1s = [float(v) for v in b["alpha1s"]]
        alpha0, breakpoint_m = float(b["alpha0"]), float(b["breakpoint_m"])
        base = SimConfig(
            density_per_km2=float(b["mu_min"]),
            model=make_model(ModelFamily.BOUNDED, [breakpoint_m], [alpha0, alpha1s[0]]),
            trials=trials,
            seed=self.seed,
        )
        result = table2(
            taus,
            alpha1s,
            base,
            alpha0=alpha0,
            breakpoint_m=breakpoint_m,
            mu_min=float(b["mu_min"]),
            mu_max=float(b["mu_max"]),
            tolerance=float(b["tolerance"]),
            pool=self.pool,
        )

        notes = [
            f"dual-slope bounded model, R_C = {breakpoint_m:g} m, alpha_0 = {alpha0:g}",
            f"base trials {trials}, golden-section trials {4 * trials}, bracket tolerance {float(b['tolerance']):g}",
        ]
        for (tau, a1), msg in sorted(result.errors.items()):
            notes.append(f"tau={tau:g} dB alpha1={a1:g}: {msg}")
        violations = trend_violations(result)
        for v in violations:
            logger.warning(v)
        notes.extend(violations)

        rows = []
        for tau in taus:
            row = {"tau_db": tau}
            for a1 in alpha1s:
                row[alpha_column(a1)] = result.mu_star(tau, a1)
            rows.append(row)
        written = [self.sink.write_table("critical_density", rows, notes=notes)]

        cells = []
        for (tau, a1), cell in sorted(result.cells.items()):
            cells.append(
                {
                    "tau_db": tau,
                    "alpha1": a1,
                    "mu_star_per_km2": cell.mu_star_per_km2,
                    "st_star": cell.st_star,
                    "bracket_width": cell.tolerance,
                    "warnings": cell.warnings,
                    "published_per_km2": REFERENCE_CRITICAL_DENSITY.get((tau, a1)),
                    "trace": [list(p) for p in cell.search_trace],
                }
            )
        written.append(self.sink.write_json("critical_density_search", {"cells": cells}))
        return written
