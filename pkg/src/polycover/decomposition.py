"""Monotone cell decompositions of a polygon with holes.

Both decompositions share one scan-line pass. The polygon is rotated so the
scan direction is +x, cut into vertical slabs at every vertex abscissa, and
the free intervals of neighbouring slabs are chained into cells:

* trapezoidal (TCD): an interval continues while its lower and upper boundary
  edges stay the same, so every vertex event closes the cell it touches;
* boustrophedon (BCD): an interval continues while it overlaps exactly one
  interval on the other side, so only split and merge events close cells.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from shapely.geometry import Polygon
from shapely.ops import unary_union

from .errors import GeometryError
from .geometry import (
    EPS,
    PolygonWithHoles,
    Ring,
    edge_directions,
    is_monotone,
    rotate,
    rotate_points,
)

log = logging.getLogger(__name__)

MIN_CELL_AREA = 1e-4
MIN_CELL_ALTITUDE = 1e-3


class DecompositionKind(str, Enum):
    BCD = "bcd"
    TCD = "tcd"


@dataclass(frozen=True)
class Cell:
    id: int
    ring: Ring
    monotone_axis: float

    @property
    def altitude(self) -> float:
        h = self.ring.array @ np.array([math.cos(self.monotone_axis), math.sin(self.monotone_axis)])
        return float(h.max() - h.min())

    @property
    def area(self) -> float:
        return self.ring.area


@dataclass(frozen=True)
class Decomposition:
    cells: tuple[Cell, ...]
    scan_direction: float
    kind: DecompositionKind
    altitude_sum: float


def altitude_sum(cells) -> float:
    """Sum of cell extents along each cell's monotone axis."""
    return float(sum(c.altitude for c in cells))


def _snap(values: np.ndarray, tol: float) -> np.ndarray:
    """Replace values closer than ``tol`` to their sorted predecessor by the
    group's first value."""
    order = np.argsort(values, kind="stable")
    out = values.copy()
    rep = None
    prev = None
    for i in order:
        v = values[i]
        if prev is None or v - prev > tol:
            rep = v
        out[i] = rep
        prev = v
    return out


@dataclass
class _Piece:
    xa: float
    xb: float
    lower: int
    upper: int


def _scan(pwh: PolygonWithHoles, kind: DecompositionKind, tol: float = EPS):
    """Cells of an already rotated polygon, each as consecutive slab pieces,
    together with the edge evaluator ``y_at(edge, x)``."""
    edges = pwh.edge_array
    xs = _snap(np.concatenate([edges[:, 0], edges[:, 2]]), tol)
    n_e = len(edges)
    sx1, sx2 = xs[:n_e], xs[n_e:]
    y1, y2 = edges[:, 1], edges[:, 3]
    lo_x, hi_x = np.minimum(sx1, sx2), np.maximum(sx1, sx2)
    sloped = sx1 != sx2
    events = np.unique(xs)

    def y_at(e: int, x: float) -> float:
        return y1[e] + (y2[e] - y1[e]) * (x - sx1[e]) / (sx2[e] - sx1[e])

    finished: list[list[_Piece]] = []
    open_cells: list[list[_Piece]] = []  # aligned with the previous slab's intervals
    prev_iv: list[tuple[int, int]] = []
    for k in range(len(events) - 1):
        xa, xb = float(events[k]), float(events[k + 1])
        xm = 0.5 * (xa + xb)
        active = np.nonzero(sloped & (lo_x <= xa) & (hi_x >= xb))[0]
        ym = [y_at(e, xm) for e in active]
        ordered = [int(active[i]) for i in np.argsort(ym, kind="stable")]
        if len(ordered) % 2:
            raise GeometryError("scan line crosses the boundary an odd number of times")
        cur_iv = [(ordered[i], ordered[i + 1]) for i in range(0, len(ordered), 2)]
        inherit = _link(prev_iv, cur_iv, xa, y_at, kind, tol)
        new_open: list[list[_Piece]] = []
        continued = set()
        for j, (lo, up) in enumerate(cur_iv):
            piece = _Piece(xa, xb, lo, up)
            src = inherit.get(j)
            if src is None:
                new_open.append([piece])
            else:
                continued.add(src)
                open_cells[src].append(piece)
                new_open.append(open_cells[src])
        for i, cell in enumerate(open_cells):
            if i not in continued:
                finished.append(cell)
        open_cells, prev_iv = new_open, cur_iv
    finished.extend(open_cells)
    return finished, y_at


def _link(prev_iv, cur_iv, x, y_at, kind, tol) -> dict[int, int]:
    """Map current interval index -> previous interval index it continues."""
    if not prev_iv or not cur_iv:
        return {}
    if kind is DecompositionKind.TCD:
        index = {iv: i for i, iv in enumerate(prev_iv)}
        return {j: index[iv] for j, iv in enumerate(cur_iv) if iv in index}
    left = [(y_at(lo, x), y_at(up, x)) for lo, up in prev_iv]
    right = [(y_at(lo, x), y_at(up, x)) for lo, up in cur_iv]
    nl = len(left)
    parent = list(range(nl + len(right)))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for i, (l0, l1) in enumerate(left):
        for j, (r0, r1) in enumerate(right):
            if min(l1, r1) - max(l0, r0) > tol:
                parent[find(i)] = find(nl + j)
    groups: dict[int, list[int]] = {}
    for a in range(len(parent)):
        groups.setdefault(find(a), []).append(a)
    out = {}
    for members in groups.values():
        ls = [m for m in members if m < nl]
        rs = [m - nl for m in members if m >= nl]
        if len(ls) == 1 and len(rs) == 1:
            out[rs[0]] = ls[0]
    return out


def _pieces_to_ring(pieces: list[_Piece], y_at) -> list[tuple[float, float]]:
    lower, upper = [], []
    for p in pieces:
        lower += [(p.xa, y_at(p.lower, p.xa)), (p.xb, y_at(p.lower, p.xb))]
        upper += [(p.xa, y_at(p.upper, p.xa)), (p.xb, y_at(p.upper, p.xb))]
    return lower + upper[::-1]


def _decompose(pwh: PolygonWithHoles, direction: float, kind: DecompositionKind) -> list[Cell]:
    if pwh.area <= EPS:
        raise GeometryError("zero-area polygon")
    rotated = rotate(pwh, -direction)
    raw, y_at = _scan(rotated, kind)
    corners = np.vstack([r.array for r in pwh.rings])
    snap_tol = 1e-9 * (1.0 + float(np.abs(corners).max()))
    rings = []
    for pieces in raw:
        pts = rotate_points(_pieces_to_ring(pieces, y_at), direction)
        # undo rotation round-off on points that are input vertices
        d = np.hypot(*(pts[:, None, :] - corners[None, :, :]).transpose(2, 0, 1))
        near = d.argmin(axis=1)
        hit = d[np.arange(len(pts)), near] <= snap_tol
        pts[hit] = corners[near[hit]]
        try:
            rings.append(Ring.from_points(pts.tolist(), check=False))
        except GeometryError:
            log.warning("dropping degenerate cell at x=%.6g", pieces[0].xa)
    rings = _merge_slivers(rings, direction)
    return [Cell(i, r, direction) for i, r in enumerate(rings)]


def _merge_slivers(rings: list[Ring], direction: float) -> list[Ring]:
    def small(r: Ring) -> bool:
        h = r.array @ np.array([math.cos(direction), math.sin(direction)])
        return r.area < MIN_CELL_AREA or h.max() - h.min() < MIN_CELL_ALTITUDE

    rings = list(rings)
    while True:
        idx = next((i for i, r in enumerate(rings) if small(r)), None)
        if idx is None:
            return rings
        sliver = Polygon(rings[idx].vertices)
        grown = sliver.buffer(1e-6)
        shared = []
        for j, r in enumerate(rings):
            if j == idx:
                continue
            other = Polygon(r.vertices)
            length = grown.intersection(other.boundary).length
            if length > 0:
                shared.append((-length, j, other))
        merged = False
        for _, j, other in sorted(shared, key=lambda t: (t[0], t[1])):
            union = unary_union([sliver, other])
            if union.geom_type != "Polygon" or len(union.interiors):
                continue
            try:
                ring = Ring.from_points(union.exterior.coords[:-1]).oriented(rings[j].orientation)
            except GeometryError:
                continue
            if is_monotone(ring, direction):
                rings[j] = ring
                merged = True
                break
        if not merged:
            log.warning("dropping sliver cell with area %.3g m^2", rings[idx].area)
        del rings[idx]


def decompose_bcd(pwh: PolygonWithHoles, direction: float) -> list[Cell]:
    """Boustrophedon decomposition into cells monotone along ``direction``."""
    return _decompose(pwh, direction, DecompositionKind.BCD)


def decompose_tcd(pwh: PolygonWithHoles, direction: float) -> list[Cell]:
    """Trapezoidal decomposition with a cut at every vertex event."""
    return _decompose(pwh, direction, DecompositionKind.TCD)


def decompose(pwh: PolygonWithHoles, direction: float, kind) -> list[Cell]:
    return _decompose(pwh, direction, DecompositionKind(kind))


def best_decomposition(pwh: PolygonWithHoles, kind, directions=None) -> Decomposition:
    """Decompose along every edge direction and keep the smallest altitude sum.

    Ties go to fewer cells, then to the smaller angle.
    """
    kind = DecompositionKind(kind)
    candidates = edge_directions(pwh) if directions is None else directions
    best = None
    errors = []
    for theta in candidates:
        try:
            cells = _decompose(pwh, theta, kind)
        except GeometryError as exc:
            errors.append(exc)
            continue
        w = altitude_sum(cells)
        tol = 1e-9 * max(1.0, w)
        if (
            best is None
            or w < best.altitude_sum - tol
            or (abs(w - best.altitude_sum) <= tol and len(cells) < len(best.cells))
        ):
            best = Decomposition(tuple(cells), theta, kind, w)
    if best is None:
        raise GeometryError(f"decomposition failed in every direction: {errors[:1]}")
    return best
