"""Penalty-gain grid for the meta-algorithm.

The grid starts at weight/sqrt(violation_bound) and advances by
tolerance / (violation_bound + weight / H^2) until it passes
2 * weight / tolerance, which keeps the selection objective's variation at
most ``tolerance`` between consecutive points.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError


@dataclass(frozen=True)
class PenaltyGrid:
    violation_bound: float
    weight: float
    tolerance: float
    points: np.ndarray

    def __len__(self) -> int:
        return len(self.points)


def build_penalty_grid(violation_bound: float, weight: float,
                       tolerance: float) -> PenaltyGrid:
    """Construct the grid of penalty gains.

    Requires violation_bound > 0, weight > 0 and 0 < tolerance <
    2*sqrt(violation_bound) (so the start lies strictly below the cap and the
    grid has at least two points).
    """
    if violation_bound <= 0 or weight <= 0:
        raise ParameterError("violation_bound and weight must be positive")
    if not 0.0 < tolerance < 2.0 * np.sqrt(violation_bound):
        raise ParameterError(
            f"tolerance must lie in (0, 2*sqrt(violation_bound)) = "
            f"(0, {2.0 * np.sqrt(violation_bound):g}), got {tolerance!r}")
    cap = 2.0 * weight / tolerance
    h = weight / np.sqrt(violation_bound)
    points = [h]
    append = points.append
    while h < cap:
        h = h + tolerance / (violation_bound + weight / (h * h))
        append(h)
    return PenaltyGrid(violation_bound=float(violation_bound), weight=float(weight),
                       tolerance=float(tolerance), points=np.asarray(points))
