"""Boustrophedon sweep lines inside monotone cells and their permutations."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import shapely

from .decomposition import Cell
from .errors import GeometryError, InvalidInputError
from .geometry import (
    EPS,
    Point,
    Polyline,
    dedupe_directions,
    is_monotone,
    normalize_angle,
    ring_edge_directions,
    rotate_points,
    same_direction,
    segments_free,
)

VARIANTS = (("ccw", "up"), ("cw", "up"), ("ccw", "down"), ("cw", "down"))


@dataclass(frozen=True)
class SweepPattern:
    cell_id: int
    waypoints: tuple[Point, ...]
    sweep_mask: tuple[bool, ...]  # per segment: True for a straight sweep segment
    sweep_direction: float
    variant: tuple[str, str]

    @property
    def start(self) -> Point:
        return self.waypoints[0]

    @property
    def goal(self) -> Point:
        return self.waypoints[-1]

    @property
    def polyline(self) -> Polyline:
        return Polyline(self.waypoints)

    def sweep_segments(self) -> list[tuple[Point, Point]]:
        w = self.waypoints
        return [(w[i], w[i + 1]) for i, s in enumerate(self.sweep_mask) if s]

    def reversed(self) -> "SweepPattern":
        sense = "cw" if self.variant[0] == "ccw" else "ccw"
        order = "down" if self.variant[1] == "up" else "up"
        return SweepPattern(
            self.cell_id,
            tuple(reversed(self.waypoints)),
            tuple(reversed(self.sweep_mask)),
            self.sweep_direction,
            (sense, order),
        )


def sweepable_directions(cell: Cell, candidates=None) -> tuple[float, ...]:
    """Candidate sweep directions along which the cell can be swept in one
    back-and-forth pass (the cell is monotone perpendicular to them)."""
    if candidates is None:
        candidates = ring_edge_directions(cell.ring)
    own = normalize_angle(cell.monotone_axis + math.pi / 2)
    dirs = dedupe_directions([*candidates, own])
    return tuple(d for d in dirs if is_monotone(cell.ring, d + math.pi / 2))


def _chord_at(pts: np.ndarray, y: float, tol: float) -> tuple[float, float] | None:
    x1, y1 = pts[:, 0], pts[:, 1]
    x2, y2 = np.roll(x1, -1), np.roll(y1, -1)
    xs = []
    flat = np.abs(y2 - y1) <= tol
    on_flat = flat & (np.abs(y1 - y) <= tol)
    xs.extend(x1[on_flat].tolist())
    xs.extend(x2[on_flat].tolist())
    span = ~flat & (np.minimum(y1, y2) - tol <= y) & (np.maximum(y1, y2) + tol >= y)
    if span.any():
        t = np.clip((y - y1[span]) / (y2[span] - y1[span]), 0.0, 1.0)
        xs.extend((x1[span] + t * (x2[span] - x1[span])).tolist())
    if not xs:
        return None
    return min(xs), max(xs)


def straight_segments(cell: Cell, direction: float, sweep_distance: float, tol: float = EPS):
    """Sweep chords parallel to ``direction``, ordered from the lowest line up.

    Lines start at the bottommost vertex and are offset by ``sweep_distance``;
    a last line is added at the top when the remainder exceeds ``tol``. Cells
    thinner than ``sweep_distance`` get a single centred line.
    """
    if not sweep_distance > 0:
        raise InvalidInputError("sweep_distance must be > 0")
    pts = rotate_points(cell.ring.array, -direction)
    ymin, ymax = float(pts[:, 1].min()), float(pts[:, 1].max())
    if ymax - ymin < sweep_distance:
        levels = [0.5 * (ymin + ymax)]
    else:
        levels = []
        k = 0
        while ymin + k * sweep_distance < ymax - tol:
            levels.append(ymin + k * sweep_distance)
            k += 1
        levels.append(ymax)
    chords = []
    for y in levels:
        c = _chord_at(pts, y, max(tol, 1e-12 * (abs(y) + 1)))
        if c is None:
            raise GeometryError(f"sweep line misses cell {cell.id}")
        ends = rotate_points([(c[0], y), (c[1], y)], direction).tolist()
        chords.append((tuple(ends[0]), tuple(ends[1])))
    return chords


def permutations(cell: Cell, direction: float, router, sweep_distance: float) -> list[SweepPattern]:
    """The four start-corner/start-direction orderings of one direction's chords.

    ``router`` answers free-space shortest paths (a :class:`PathTable`);
    consecutive chords are joined by the shortest path between their ends.
    """
    chords = straight_segments(cell, direction, sweep_distance)
    n = len(chords)
    # transitions only ever join same-side ends of consecutive chords
    left = np.array([c[0] for c in chords])
    right = np.array([c[1] for c in chords])
    links = {}
    if n > 1:
        src = np.vstack([left[:-1], right[:-1]])
        dst = np.vstack([left[1:], right[1:]])
        direct = segments_free(router.pwh, src, dst)
        for k in range(len(src)):
            a, b = tuple(src[k].tolist()), tuple(dst[k].tolist())
            if a == b:
                links[(a, b)] = Polyline((a,))
            elif direct[k]:
                links[(a, b)] = Polyline((a, b))
            else:
                links[(a, b)] = router.path(a, b)[0]
    patterns: list[SweepPattern] = []
    seen = set()
    for sense, order in VARIANTS:
        seq = range(n) if order == "up" else range(n - 1, -1, -1)
        # ccw runs +x along the bottom line and -x along the top line
        forward = (sense == "ccw") == (order == "up")
        pts: list[Point] = []
        mask: list[bool] = []
        for step, k in enumerate(seq):
            a, b = chords[k] if forward else (chords[k][1], chords[k][0])
            if step:
                prev = pts[-1]
                key = (prev, a)
                if key in links:
                    trans = links[key].waypoints
                else:
                    trans = tuple(reversed(links[(a, prev)].waypoints))
                for q in trans[1:]:
                    _append(pts, mask, q, False)
            _append(pts, mask, a, False)
            _append(pts, mask, b, True)
            forward = not forward
        key = tuple(pts)
        if key in seen:
            continue
        seen.add(key)
        patterns.append(SweepPattern(cell.id, key, tuple(mask), direction, (sense, order)))
    return patterns


def _append(pts: list, mask: list, q, sweep: bool) -> None:
    q = (float(q[0]), float(q[1]))
    if pts and pts[-1] == q:
        return
    if pts:
        mask.append(sweep)
    pts.append(q)


def all_patterns(cell: Cell, router, sweep_distance: float, directions=None) -> list[SweepPattern]:
    """Union of :func:`permutations` over every sweepable direction."""
    dirs = sweepable_directions(cell) if directions is None else directions
    out = []
    for d in dirs:
        out.extend(permutations(cell, d, router, sweep_distance))
    if not out:
        raise GeometryError(f"cell {cell.id} has no sweepable direction")
    return out


def chord_coverage(cell: Cell, direction: float, sweep_distance: float) -> float:
    """Fraction of the cell area within ``sweep_distance / 2`` of a chord."""
    chords = straight_segments(cell, direction, sweep_distance)
    lines = shapely.linestrings([[a, b] if a != b else [a, a] for a, b in chords])
    band = shapely.union_all(shapely.buffer(lines, sweep_distance / 2))
    poly = shapely.Polygon(cell.ring.vertices)
    return 1.0 - poly.difference(band).area / poly.area


def covering_directions(cell: Cell, sweep_distance: float, target: float = 0.999) -> tuple[float, ...]:
    """Sweepable directions that cover the cell at least as well as sweeping
    perpendicular to its monotone axis, or reach ``target`` coverage.

    Chords start at the bottommost vertex, so a direction tilted against a
    long edge leaves uncovered wedges; those directions are cheaper only
    because they cover less and are dropped here. The perpendicular direction
    itself is always kept.
    """
    dirs = sweepable_directions(cell)
    own = normalize_angle(cell.monotone_axis + math.pi / 2)
    cov = {d: chord_coverage(cell, d, sweep_distance) for d in dirs}
    base = next((cov[d] for d in dirs if same_direction(d, own)), target)
    need = min(target, base) - 1e-9
    return tuple(d for d in dirs if cov[d] >= need or same_direction(d, own))
