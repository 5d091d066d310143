"""Planar geometry: rings, polygons with holes, predicates and free-space tests.

Sign decisions in :func:`orientation` are exact (float filter with a rational
fallback). Constructions such as intersections and offsets are plain floating
point, with ``EPS`` as the global snapping tolerance in meters.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
import shapely
from shapely.geometry import LinearRing, Polygon

from .errors import GeometryError, InvalidInputError

EPS = 1e-9
ANGLE_TOL = 1e-9

Point = tuple[float, float]
Segment = tuple[Point, Point]

# Shewchuk's static error bound for the 2x2 orientation determinant.
_CCW_ERRBOUND = (3.0 + 16.0 * 2.0**-53) * 2.0**-53


class Orientation(IntEnum):
    CW = -1
    COLLINEAR = 0
    CCW = 1


def orientation(p: Point, q: Point, r: Point) -> Orientation:
    """Exact orientation of the triangle ``p, q, r``."""
    detleft = (q[0] - p[0]) * (r[1] - p[1])
    detright = (q[1] - p[1]) * (r[0] - p[0])
    det = detleft - detright
    errbound = _CCW_ERRBOUND * (abs(detleft) + abs(detright))
    if det > errbound:
        return Orientation.CCW
    if -det > errbound:
        return Orientation.CW
    px, py = Fraction(p[0]), Fraction(p[1])
    exact = (Fraction(q[0]) - px) * (Fraction(r[1]) - py) - (Fraction(q[1]) - py) * (
        Fraction(r[0]) - px
    )
    if exact > 0:
        return Orientation.CCW
    if exact < 0:
        return Orientation.CW
    return Orientation.COLLINEAR


def normalize_angle(theta: float) -> float:
    """Map an undirected line direction to ``[0, pi)``."""
    t = math.fmod(theta, math.pi)
    if t < 0:
        t += math.pi
    if math.pi - t <= ANGLE_TOL:
        t = 0.0
    return t


def same_direction(a: float, b: float, tol: float = ANGLE_TOL) -> bool:
    d = abs(normalize_angle(a) - normalize_angle(b))
    return d <= tol or math.pi - d <= tol


def dedupe_directions(angles: Iterable[float], tol: float = ANGLE_TOL) -> tuple[float, ...]:
    """Sort and merge directions that are equal modulo pi."""
    out: list[float] = []
    for a in sorted(normalize_angle(a) for a in angles):
        if not out or a - out[-1] > tol:
            out.append(a)
    if len(out) > 1 and math.pi - out[-1] + out[0] <= tol:
        out.pop()
    return tuple(out)


def rotate_points(pts, theta: float) -> np.ndarray:
    """Rotate an (n, 2) array about the origin by ``theta``."""
    pts = np.asarray(pts, dtype=float).reshape(-1, 2)
    c, s = math.cos(theta), math.sin(theta)
    out = np.empty_like(pts)
    out[:, 0] = c * pts[:, 0] - s * pts[:, 1]
    out[:, 1] = s * pts[:, 0] + c * pts[:, 1]
    return out


def signed_area(pts) -> float:
    a = np.asarray(pts, dtype=float)
    x, y = a[:, 0], a[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def _canonical_vertices(points: Sequence[Sequence[float]], tol: float) -> list[Point]:
    pts = [(float(x), float(y)) for x, y in points]
    if not all(math.isfinite(x) and math.isfinite(y) for x, y in pts):
        raise GeometryError("non-finite coordinate")
    if len(pts) > 1 and math.dist(pts[0], pts[-1]) <= tol:
        pts.pop()
    changed = True
    while changed and len(pts) >= 3:
        changed = False
        out: list[Point] = []
        n = len(pts)
        for i in range(n):
            prev = out[-1] if out else pts[i - 1]
            cur, nxt = pts[i], pts[(i + 1) % n]
            if math.dist(prev, cur) <= tol:
                changed = True
                continue
            length = math.dist(prev, nxt)
            if length > tol:
                cross = (nxt[0] - prev[0]) * (cur[1] - prev[1]) - (nxt[1] - prev[1]) * (
                    cur[0] - prev[0]
                )
                dot = (cur[0] - prev[0]) * (nxt[0] - prev[0]) + (cur[1] - prev[1]) * (
                    nxt[1] - prev[1]
                )
                if abs(cross) / length <= tol and 0 <= dot <= length * length:
                    changed = True
                    continue
            out.append(cur)
        pts = out
    return pts


@dataclass(frozen=True)
class Ring:
    """Closed simple polygon boundary; the closing vertex is implicit."""

    vertices: tuple[Point, ...]

    @classmethod
    def from_points(cls, points, tol: float = EPS, check: bool = True) -> "Ring":
        pts = _canonical_vertices(points, tol)
        if len(pts) < 3:
            raise GeometryError("ring has fewer than 3 distinct vertices")
        ring = cls(tuple(pts))
        if check:
            if abs(ring.signed_area) <= tol * tol:
                raise GeometryError("ring has zero area")
            if not LinearRing(pts).is_simple:
                raise GeometryError("ring self-intersects")
        return ring

    @cached_property
    def array(self) -> np.ndarray:
        a = np.array(self.vertices, dtype=float)
        a.setflags(write=False)
        return a

    @cached_property
    def signed_area(self) -> float:
        return signed_area(self.array)

    @property
    def area(self) -> float:
        return abs(self.signed_area)

    @property
    def orientation(self) -> Orientation:
        return Orientation.CCW if self.signed_area > 0 else Orientation.CW

    def oriented(self, want: Orientation) -> "Ring":
        if self.orientation == want:
            return self
        return Ring(tuple(reversed(self.vertices)))

    def rotated(self, theta: float) -> "Ring":
        return Ring(tuple(map(tuple, rotate_points(self.array, theta).tolist())))

    def edges(self) -> np.ndarray:
        """(n, 4) array of ``x1, y1, x2, y2`` rows."""
        a = self.array
        return np.hstack([a, np.roll(a, -1, axis=0)])

    def __len__(self) -> int:
        return len(self.vertices)


@dataclass(frozen=True)
class PolygonWithHoles:
    """Free space: a CCW outer ring minus CW hole rings."""

    outer: Ring
    holes: tuple[Ring, ...] = ()

    @classmethod
    def from_coords(cls, outer, holes=(), validate: bool = True) -> "PolygonWithHoles":
        try:
            o = Ring.from_points(outer).oriented(Orientation.CCW)
            hs = tuple(Ring.from_points(h).oriented(Orientation.CW) for h in holes)
        except GeometryError as exc:
            raise InvalidInputError(str(exc)) from exc
        pwh = cls(o, hs)
        if validate:
            pwh.validate()
        return pwh

    def validate(self) -> None:
        shell = Polygon(self.outer.vertices)
        polys = [Polygon(h.vertices) for h in self.holes]
        for i, hp in enumerate(polys):
            if not shell.contains_properly(hp):
                raise InvalidInputError(f"hole {i} is not strictly inside the outer ring")
            for j in range(i):
                if not hp.disjoint(polys[j]):
                    raise InvalidInputError(f"holes {j} and {i} intersect or touch")

    @property
    def rings(self) -> tuple[Ring, ...]:
        return (self.outer, *self.holes)

    @cached_property
    def shapely(self) -> Polygon:
        return Polygon(self.outer.vertices, [h.vertices for h in self.holes])

    @cached_property
    def area(self) -> float:
        return self.outer.area - sum(h.area for h in self.holes)

    @cached_property
    def edge_array(self) -> np.ndarray:
        """All boundary edges stacked as (E, 4)."""
        return np.vstack([r.edges() for r in self.rings])

    @property
    def hole_vertex_count(self) -> int:
        return sum(len(h) for h in self.holes)

    def bounds(self) -> tuple[float, float, float, float]:
        a = self.outer.array
        return (float(a[:, 0].min()), float(a[:, 1].min()), float(a[:, 0].max()), float(a[:, 1].max()))

    def to_coords(self) -> dict:
        return {
            "outer": [list(p) for p in self.outer.vertices],
            "holes": [[list(p) for p in h.vertices] for h in self.holes],
        }


def rotate(pwh: PolygonWithHoles, theta: float) -> PolygonWithHoles:
    """Rotate every vertex about the origin; orientation is preserved."""
    return PolygonWithHoles(pwh.outer.rotated(theta), tuple(h.rotated(theta) for h in pwh.holes))


def edge_directions(pwh: PolygonWithHoles) -> tuple[float, ...]:
    """Distinct undirected edge directions of all rings, sorted, in ``[0, pi)``."""
    e = pwh.edge_array
    return dedupe_directions(np.arctan2(e[:, 3] - e[:, 1], e[:, 2] - e[:, 0]).tolist())


def ring_edge_directions(ring: Ring) -> tuple[float, ...]:
    e = ring.edges()
    return dedupe_directions(np.arctan2(e[:, 3] - e[:, 1], e[:, 2] - e[:, 0]).tolist())


def is_monotone(ring: Ring | Sequence[Point], direction: float, tol: float = EPS) -> bool:
    """True if every line perpendicular to ``direction`` meets the polygon in
    one connected set, i.e. the boundary rises and falls once along it."""
    pts = ring.array if isinstance(ring, Ring) else np.asarray(ring, dtype=float)
    if abs(signed_area(pts)) <= tol * tol:
        raise GeometryError("degenerate ring")
    # height along the monotone axis
    h = pts @ np.array([math.cos(direction), math.sin(direction)])
    dh = np.roll(h, -1) - h
    signs = np.sign(dh[np.abs(dh) > tol])
    if len(signs) == 0:
        raise GeometryError("degenerate ring")
    changes = int(np.count_nonzero(signs != np.roll(signs, -1)))
    return changes <= 2


def offset_inward(pwh: PolygonWithHoles, wall_distance: float) -> PolygonWithHoles:
    """Erode the free space by ``wall_distance`` using mitred parallel offsets.

    The mitre is limited to four times the distance, beyond which the corner
    is bevelled.
    """
    if wall_distance < 0 or not math.isfinite(wall_distance):
        raise InvalidInputError("wall_distance must be finite and >= 0")
    if wall_distance == 0:
        return pwh
    eroded = pwh.shapely.buffer(-wall_distance, join_style="mitre", mitre_limit=4.0)
    if eroded.is_empty:
        raise GeometryError(f"offset by {wall_distance} m empties the free space")
    if eroded.geom_type != "Polygon":
        raise GeometryError(f"offset by {wall_distance} m splits the free space")
    if len(eroded.interiors) != len(pwh.holes):
        raise GeometryError(
            f"offset by {wall_distance} m merges holes with each other or the boundary"
        )
    try:
        return PolygonWithHoles.from_coords(
            eroded.exterior.coords[:-1], [r.coords[:-1] for r in eroded.interiors]
        )
    except InvalidInputError as exc:
        raise GeometryError(f"offset produced an invalid polygon: {exc}") from exc


# --------------------------------------------------------------------------
# free-space tests


def _point_segment_dist2(px, py, e: np.ndarray) -> np.ndarray:
    """Squared distance from points (n,) to edges (E, 4); returns (n, E)."""
    x1, y1, x2, y2 = e[:, 0], e[:, 1], e[:, 2], e[:, 3]
    dx, dy = x2 - x1, y2 - y1
    ll = dx * dx + dy * dy
    ll = np.where(ll > 0, ll, 1.0)
    px = np.asarray(px, dtype=float)[:, None]
    py = np.asarray(py, dtype=float)[:, None]
    t = np.clip(((px - x1) * dx + (py - y1) * dy) / ll, 0.0, 1.0)
    qx, qy = x1 + t * dx - px, y1 + t * dy - py
    return qx * qx + qy * qy


def _inside_ring(px: np.ndarray, py: np.ndarray, e: np.ndarray) -> np.ndarray:
    x1, y1, x2, y2 = e[:, 0], e[:, 1], e[:, 2], e[:, 3]
    px_, py_ = px[:, None], py[:, None]
    straddle = (y1 > py_) != (y2 > py_)
    with np.errstate(divide="ignore", invalid="ignore"):
        xint = x1 + (py_ - y1) * (x2 - x1) / (y2 - y1)
    return np.count_nonzero(straddle & (px_ < xint), axis=1) % 2 == 1


def points_in_free_space(pwh: PolygonWithHoles, pts, tol: float = EPS) -> np.ndarray:
    """Closed membership test; points within ``tol`` of the boundary count as free.

    Holes are disjoint and inside the outer ring, so a point is free exactly
    when a ray crosses the boundary of all rings an odd number of times.
    """
    pts = np.asarray(pts, dtype=float).reshape(-1, 2)
    out = np.zeros(len(pts), dtype=bool)
    e = pwh.edge_array
    chunk = max(1, 400_000 // max(len(e), 1))
    for start in range(0, len(pts), chunk):
        px, py = pts[start : start + chunk, 0], pts[start : start + chunk, 1]
        on_boundary = (_point_segment_dist2(px, py, e) <= tol * tol).any(axis=1)
        out[start : start + chunk] = _inside_ring(px, py, e) | on_boundary
    return out


def _sides(ax, ay, bx, by, cx, cy, tol):
    """Sign of the signed distance of c to line ab, zero within ``tol``.
    Broadcasts; ab must be non-degenerate."""
    dx, dy = bx - ax, by - ay
    norm = np.hypot(dx, dy)
    d = (dx * (cy - ay) - dy * (cx - ax)) / norm
    return np.where(np.abs(d) <= tol, 0, np.sign(d))


def segments_free(pwh: PolygonWithHoles, a, b, tol: float = EPS) -> np.ndarray:
    """Vectorized free-space containment of segments ``a[k]``-``b[k]``.

    Grazing contact with the boundary counts as free.
    """
    a = np.asarray(a, dtype=float).reshape(-1, 2)
    b = np.asarray(b, dtype=float).reshape(-1, 2)
    n = len(a)
    result = np.zeros(n, dtype=bool)
    if n == 0:
        return result
    e = pwh.edge_array
    seglen = np.hypot(b[:, 0] - a[:, 0], b[:, 1] - a[:, 1])
    degenerate = seglen <= tol
    if degenerate.any():
        result[degenerate] = points_in_free_space(pwh, a[degenerate], tol)
    idx = np.nonzero(~degenerate)[0]
    chunk = max(1, 400_000 // max(len(e), 1))
    ex1, ey1, ex2, ey2 = e[:, 0], e[:, 1], e[:, 2], e[:, 3]
    for start in range(0, len(idx), chunk):
        sel = idx[start : start + chunk]
        ax, ay = a[sel, 0][:, None], a[sel, 1][:, None]
        bx, by = b[sel, 0][:, None], b[sel, 1][:, None]
        sc = _sides(ax, ay, bx, by, ex1, ey1, tol)
        sd = _sides(ax, ay, bx, by, ex2, ey2, tol)
        sa = _sides(ex1, ey1, ex2, ey2, ax, ay, tol)
        sb = _sides(ex1, ey1, ex2, ey2, bx, by, tol)
        crossing = ((sc * sd) < 0) & ((sa * sb) < 0)
        blocked = crossing.any(axis=1)
        # boundary vertices lying on the segment interior need a finer check
        dx, dy = bx - ax, by - ay
        ll = dx * dx + dy * dy
        t = ((ex1 - ax) * dx + (ey1 - ay) * dy) / ll
        touch_tol = tol / np.sqrt(ll)
        contact = (sc == 0) & (t > touch_tol) & (t < 1 - touch_tol)
        has_contact = contact.any(axis=1) & ~blocked
        simple = ~blocked & ~has_contact
        if simple.any():
            mids = 0.5 * (a[sel[simple]] + b[sel[simple]])
            ok = points_in_free_space(pwh, mids, tol)
            result[sel[np.nonzero(simple)[0][ok]]] = True
        rows = np.nonzero(has_contact)[0]
        if len(rows):
            # split each touching segment at its contacts and test every piece
            owner, mids = [], []
            for k in rows:
                ts = np.unique(np.concatenate([[0.0, 1.0], t[k][contact[k]]]))
                mids_t = 0.5 * (ts[:-1] + ts[1:])
                i = sel[k]
                mids.append(a[i] + mids_t[:, None] * (b[i] - a[i]))
                owner.append(np.full(len(mids_t), i))
            owner = np.concatenate(owner)
            ok = points_in_free_space(pwh, np.vstack(mids), tol)
            bad = np.unique(owner[~ok])
            good = np.setdiff1d(sel[rows], bad)
            result[good] = True
    return result


def segment_free(pwh: PolygonWithHoles, a: Point, b: Point, tol: float = EPS) -> bool:
    return bool(segments_free(pwh, [a], [b], tol)[0])


def segment_boundary_distance(pwh: PolygonWithHoles, a: Point, b: Point) -> float:
    """Minimum distance between segment ab and the free-space boundary."""
    line = shapely.LineString([a, b]) if a != b else shapely.Point(a)
    return float(pwh.shapely.boundary.distance(line))


def contains(pwh: PolygonWithHoles, seg: Segment, clearance: float = 0.0) -> bool:
    """True iff the segment lies in the closed free space with at least
    ``clearance`` distance to every boundary (``1e-9`` m slack)."""
    a, b = seg
    if not segment_free(pwh, a, b):
        return False
    if clearance <= 0:
        return True
    return segment_boundary_distance(pwh, a, b) >= clearance - EPS


@dataclass(frozen=True)
class Polyline:
    waypoints: tuple[Point, ...]

    @classmethod
    def of(cls, pts) -> "Polyline":
        return cls(tuple((float(x), float(y)) for x, y in pts))

    @property
    def length(self) -> float:
        w = self.waypoints
        return sum(math.dist(w[i], w[i + 1]) for i in range(len(w) - 1))

    def segment_lengths(self) -> list[float]:
        w = self.waypoints
        return [math.dist(w[i], w[i + 1]) for i in range(len(w) - 1)]

    def reversed(self) -> "Polyline":
        return Polyline(tuple(reversed(self.waypoints)))

    def __len__(self) -> int:
        return len(self.waypoints)
