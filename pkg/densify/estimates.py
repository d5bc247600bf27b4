"""Monte Carlo probability estimates shared by the geometry and link-level engines."""

from __future__ import annotations

import math
from dataclasses import dataclass

from densify.errors import InvalidArgumentError


@dataclass(frozen=True)
class CoverageEstimate:
    p_hat: float
    std_err: float
    trials: int

    @classmethod
    def from_counts(cls, successes: int, trials: int) -> "CoverageEstimate":
        if trials < 1:
            raise InvalidArgumentError(f"trials must be >= 1, got {trials}")
        if not 0 <= successes <= trials:
            raise InvalidArgumentError(f"successes {successes} outside [0, {trials}]")
        p = successes / trials
        return cls(p_hat=p, std_err=math.sqrt(p * (1 - p) / trials), trials=trials)

    def within(self, value: float, sigmas: float = 3.0) -> bool:
        """True if *value* lies within ``sigmas`` standard errors of the estimate."""
        # a zero std_err (p_hat at 0 or 1) still allows one trial's worth of slack
        slack = max(self.std_err, 1.0 / self.trials)
        return abs(self.p_hat - value) <= sigmas * slack
