"""Treatment-effect intervals from per-arm counterfactual intervals."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .intervals import Interval


@dataclass(frozen=True)
class ITEInterval:
    """Interval for Y(1) - Y(0), with the per-arm miscoverage levels used."""

    lower: float
    upper: float
    alpha_1: float | None = None
    alpha_0: float | None = None

    def __post_init__(self):
        if math.isnan(self.lower) or math.isnan(self.upper):
            raise ValueError("ITE bounds must not be NaN")
        if self.lower > self.upper:
            raise ValueError("ITE lower bound above upper bound")

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def contains(self, v: float) -> bool:
        return self.lower <= v <= self.upper


def _sub(a: float, b: float) -> float:
    # difference with infinities; opposite-sign infinities cannot meet here
    if math.isinf(a) and math.isinf(b) and a == b:
        raise ValueError("degenerate interval arithmetic (inf - inf)")
    return a - b


def bonferroni_ite(c1: Interval, c0: Interval,
                   alpha_1: float | None = None,
                   alpha_0: float | None = None) -> ITEInterval:
    """Difference the two arm intervals.

    [c1.lower - c0.upper, c1.upper - c0.lower] covers Y(1) - Y(0) with
    probability at least 1 - alpha_1 - alpha_0 whenever each arm interval
    holds its own level; the width is exactly the sum of the arm widths.
    """
    return ITEInterval(
        _sub(c1.lower, c0.upper), _sub(c1.upper, c0.lower), alpha_1, alpha_0
    )
