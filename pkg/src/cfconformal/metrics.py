"""Coverage and width summaries for batches of intervals."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np


def coverage(intervals: Sequence, truths) -> float:
    """Fraction of truths falling inside their interval (bounds inclusive)."""
    truths = np.asarray(truths, dtype=np.float64)
    if truths.ndim != 1:
        raise ValueError("truths must be one-dimensional")
    if len(intervals) != truths.shape[0]:
        raise ValueError(
            f"got {len(intervals)} intervals but {truths.shape[0]} truths"
        )
    if len(intervals) == 0:
        raise ValueError("coverage of an empty batch is undefined")
    if not np.all(np.isfinite(truths)):
        raise ValueError("truths must be finite")
    hits = sum(1 for iv, v in zip(intervals, truths) if iv.contains(float(v)))
    return hits / len(intervals)


@dataclass(frozen=True)
class WidthSummary:
    """Mean width, the mean over finite widths only, and the infinite count.

    mean is +inf as soon as one interval is unbounded; finite_mean is NaN
    when every interval is unbounded.
    """

    mean: float
    finite_mean: float
    n_infinite: int


def mean_width(intervals: Sequence) -> WidthSummary:
    if len(intervals) == 0:
        raise ValueError("width summary of an empty batch is undefined")
    widths = np.array([iv.width for iv in intervals], dtype=np.float64)
    n_inf = int(np.sum(np.isinf(widths)))
    mean = float(np.inf) if n_inf else float(widths.mean())
    finite = widths[np.isfinite(widths)]
    finite_mean = float(finite.mean()) if finite.size else math.nan
    return WidthSummary(mean=mean, finite_mean=finite_mean, n_infinite=n_inf)
