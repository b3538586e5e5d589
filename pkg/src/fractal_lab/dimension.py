"""Dimension estimation from scale counts via log-log slope fitting."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, asdict
from typing import Sequence

import numpy as np

from .errors import DegenerateFitError, DomainError, EmptyLevelError
from .grid import GridSet, hausdorff_sum

# Estimates outside this range are reported as-is; clamping is a display
# aid only and never alters the stored slope.
SLOPE_REPORT_MAX = 1.0 + 1e-6


@dataclass(frozen=True)
class DimensionEstimate:
    """Least-squares slope of log_base(count) against level."""

    slope: float
    intercept: float
    level_lo: int
    level_hi: int
    rms_residual: float
    points_used: int

    def __post_init__(self) -> None:
        if self.level_lo >= self.level_hi:
            raise DegenerateFitError("level_lo must be < level_hi")
        if not math.isfinite(self.slope):
            raise DomainError("slope must be finite")
        if self.rms_residual < 0:
            raise DomainError("rms_residual must be >= 0")

    @property
    def clamped_slope(self) -> float:
        """Slope clipped to [0, 1+eps] for diagnostics/display only."""
        return min(max(self.slope, 0.0), SLOPE_REPORT_MAX)

    def to_json_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)

    def to_csv_row(self) -> str:
        return (
            f"{self.level_lo},{self.level_hi},{self.slope!r},"
            f"{self.intercept!r},{self.rms_residual!r}"
        )


@dataclass(frozen=True)
class ThresholdProfile:
    """Hausdorff sums at the finest level along an increasing beta grid.

    Diagnostic only: the crossing of 1 mirrors where the measure flips
    between large and vanishing, but dimension readings come from the
    slope fit, which is far better behaved at finite depth.
    """

    betas: tuple[float, ...]
    sums: tuple[float, ...]

    def to_json_dict(self) -> dict:
        return {"betas": list(self.betas), "sums": list(self.sums)}

    def to_csv(self) -> str:
        lines = ["beta,sum"]
        lines += [f"{b!r},{s!r}" for b, s in zip(self.betas, self.sums)]
        return "\n".join(lines) + "\n"


def _log_count(count: int, base: int) -> float:
    # Exact-power detection keeps self-similar fixtures exact: log_b(b^e) = e.
    if count == 1:
        return 0.0
    e = round(math.log(count) / math.log(base))
    if e >= 0 and base**e == count:
        return float(e)
    return math.log(count) / math.log(base)


def estimate_dimension(
    counts: Sequence[int],
    level_lo: int,
    level_hi: int,
    *,
    base: int = 2,
) -> DimensionEstimate:
    """OLS fit of log_base(counts[m]) against m over the closed level range.

    Logs are taken in the grid base so the slope reads directly as a
    dimension.  Zero counts inside the range raise rather than being
    skipped: silently dropping levels biases the slope.
    """
    if base < 2:
        raise DomainError(f"base must be >= 2, got {base}")
    if level_lo < 0 or level_hi >= len(counts):
        raise DomainError(
            f"fit range [{level_lo}, {level_hi}] outside counts of length {len(counts)}"
        )
    if level_hi - level_lo < 1:
        raise DegenerateFitError(
            f"fit range [{level_lo}, {level_hi}] has fewer than two levels"
        )
    window = [int(c) for c in counts[level_lo : level_hi + 1]]
    for offset, c in enumerate(window):
        if c < 1:
            raise EmptyLevelError(
                f"count is zero at level {level_lo + offset}; cannot take its log"
            )
    x = np.arange(level_lo, level_hi + 1, dtype=np.float64)
    y = np.array([_log_count(c, base) for c in window], dtype=np.float64)
    x_bar = x.mean()
    y_bar = y.mean()
    dx = x - x_bar
    slope = float(np.dot(dx, y - y_bar) / np.dot(dx, dx))
    intercept = float(y_bar - slope * x_bar)
    residuals = y - (slope * x + intercept)
    rms = float(np.sqrt(np.mean(residuals**2)))
    return DimensionEstimate(
        slope=slope,
        intercept=intercept,
        level_lo=level_lo,
        level_hi=level_hi,
        rms_residual=rms,
        points_used=len(window),
    )


def default_fit_range(depth: int) -> tuple[int, int]:
    """Documented default fit window [depth//4, depth]."""
    if depth < 1:
        raise DegenerateFitError("need depth >= 1 to fit a slope")
    lo = depth // 4
    if lo >= depth:
        lo = depth - 1
    return lo, depth


def threshold_profile(gs: GridSet, betas: Sequence[float]) -> ThresholdProfile:
    """Finest-level Hausdorff sums along an increasing beta grid in [0,1]."""
    bs = [float(b) for b in betas]
    if any(not 0.0 <= b <= 1.0 for b in bs):
        raise DomainError("betas must lie in [0,1]")
    if any(b2 <= b1 for b1, b2 in zip(bs, bs[1:])):
        raise DomainError("betas must be strictly increasing")
    sums = tuple(hausdorff_sum(gs, b, gs.depth) for b in bs)
    return ThresholdProfile(betas=tuple(bs), sums=sums)
