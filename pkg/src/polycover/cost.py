"""Cost models for polylines: rest-to-rest flight time, distance, waypoint count."""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import InvalidInputError
from .geometry import Polyline


class CostKind(str, Enum):
    TIME = "time"
    DISTANCE = "distance"
    WAYPOINTS = "waypoints"


def segment_time(d: float, v_max: float, a_max: float) -> float:
    """Rest-to-rest time over distance ``d`` with a trapezoidal velocity ramp.

    Short segments never reach ``v_max`` and are a pure accelerate/decelerate
    triangle profile.
    """
    if d < 0:
        raise InvalidInputError(f"negative segment length {d}")
    t_acc = v_max / a_max
    d_acc = 0.5 * v_max * t_acc
    if d < 2.0 * d_acc:
        return math.sqrt(4.0 * d / a_max)
    return 2.0 * t_acc + (d - 2.0 * d_acc) / v_max


@dataclass(frozen=True)
class CostModel:
    kind: CostKind = CostKind.TIME
    v_max: float = 3.0
    a_max: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "kind", CostKind(self.kind))
        if self.kind is CostKind.TIME and not (self.v_max > 0 and self.a_max > 0):
            raise InvalidInputError("v_max and a_max must be > 0")

    def segment_costs(self, lengths) -> np.ndarray:
        """Per-segment cost, vectorized. Waypoint counting is not
        per-segment and is handled by :meth:`polyline_cost`."""
        d = np.asarray(lengths, dtype=float)
        if self.kind is CostKind.TIME:
            t_acc = self.v_max / self.a_max
            d_acc = 0.5 * self.v_max * t_acc
            short = np.sqrt(4.0 * np.clip(d, 0, None) / self.a_max)
            long_ = 2.0 * t_acc + (d - 2.0 * d_acc) / self.v_max
            return np.where(d < 2.0 * d_acc, short, long_)
        if self.kind is CostKind.DISTANCE:
            return d
        # one extra waypoint per segment
        return np.where(d > 0, 1.0, 0.0)

    def path_cost_from_lengths(self, lengths) -> float:
        """Cost of a polyline given its segment lengths."""
        lengths = list(lengths)
        if self.kind is CostKind.WAYPOINTS:
            return float(len(lengths) + 1)
        if not lengths:
            return 0.0
        return float(self.segment_costs(lengths).sum())

    def polyline_cost(self, p: Polyline) -> float:
        return polyline_cost(p, self)


def polyline_cost(p: Polyline, model: CostModel) -> float:
    """Sum of segment costs; every waypoint is a full stop."""
    if model.kind is CostKind.WAYPOINTS:
        return float(len(p.waypoints))
    if model.kind is CostKind.DISTANCE:
        return p.length
    return sum(segment_time(d, model.v_max, model.a_max) for d in p.segment_lengths())
