import math

import numpy as np
import pytest
import shapely
from hypothesis import given, settings, strategies as st

from polycover.cost import CostModel
from polycover.decomposition import Cell
from polycover.errors import InvalidInputError
from polycover.geometry import PolygonWithHoles, contains, is_monotone
from polycover.sweep import (
    all_patterns,
    chord_coverage,
    covering_directions,
    permutations,
    straight_segments,
    sweepable_directions,
)
from polycover.visibility import PathTable, build_graph

from .conftest import U_SHAPE


def cell_and_router(coords, axis=0.0, holes=()):
    pwh = PolygonWithHoles.from_coords(coords, holes)
    router = PathTable(build_graph(pwh), pwh, CostModel("distance"))
    return Cell(0, pwh.outer, axis), router, pwh


def rect(w, h):
    return [(0, 0), (w, 0), (w, h), (0, h)]


def coverage(cell, segments, sd, radius):
    """Fraction of raster pixels (size sd/10) of the cell within ``radius`` of a segment."""
    poly = shapely.Polygon(cell.ring.vertices)
    x0, y0, x1, y1 = poly.bounds
    r = sd / 10
    xs, ys = np.meshgrid(np.arange(x0 + r / 2, x1, r), np.arange(y0 + r / 2, y1, r))
    pts = shapely.points(xs.ravel(), ys.ravel())
    pts = pts[shapely.contains(poly, pts)]
    lines = shapely.multilinestrings([list(s) for s in segments])
    return float((shapely.distance(pts, lines) <= radius + 1e-9).mean())


@pytest.mark.parametrize(
    "h,sd,levels",
    [(3, 1, [0, 1, 2, 3]), (3, 2, [0, 2, 3]), (0.5, 1, [0.25])],
)
def test_rectangle_chords(h, sd, levels):
    cell, _, _ = cell_and_router(rect(10, h))
    chords = straight_segments(cell, 0.0, sd)
    assert [c[0][1] for c in chords] == pytest.approx(levels)
    for (a, b), y in zip(chords, levels):
        assert a == pytest.approx((0, y)) and b == pytest.approx((10, y))


def test_chords_reject_bad_distance():
    cell, _, _ = cell_and_router(rect(10, 3))
    with pytest.raises(InvalidInputError):
        straight_segments(cell, 0.0, 0.0)


def test_rotated_chords_are_full_intersections():
    cell, _, _ = cell_and_router([(0, 0), (10, 0), (0, 10)])
    poly = shapely.Polygon(cell.ring.vertices)
    for a, b in straight_segments(cell, 3 * math.pi / 4, 1.0):
        line = shapely.LineString([a, b])
        assert shapely.covers(poly.buffer(1e-9), line)
        d = np.subtract(b, a) / max(math.dist(a, b), 1e-12)
        longer = shapely.LineString([np.subtract(a, 1e-3 * d), np.add(b, 1e-3 * d)])
        assert math.dist(a, b) < 1e-9 or not shapely.covers(poly, longer)


@given(st.floats(0.5, 40), st.floats(0.3, 5))
def test_rectangle_chord_count(h, sd):
    cell, _, _ = cell_and_router(rect(10, h))
    n = len(straight_segments(cell, 0.0, sd))
    expected = 1 if h < sd else math.ceil(h / sd - 1e-9) + 1
    assert n == expected


def test_sweepable_directions():
    r, _, _ = cell_and_router(rect(10, 3))
    assert sweepable_directions(r) == pytest.approx((0.0, math.pi / 2))
    tri, _, _ = cell_and_router([(0, 0), (1, 0), (0, 1)])
    assert len(sweepable_directions(tri)) == 3
    u, _, _ = cell_and_router(U_SHAPE, axis=0.0)
    dirs = sweepable_directions(u)
    assert dirs == pytest.approx((math.pi / 2,))
    for d in dirs:
        assert is_monotone(u.ring, d + math.pi / 2)


def test_rectangle_patterns():
    cell, router, _ = cell_and_router(rect(10, 3))
    pats = permutations(cell, 0.0, router, 1.0)
    assert len(pats) == 4 and len({p.waypoints for p in pats}) == 4
    ccw_up = next(p for p in pats if p.variant == ("ccw", "up"))
    assert ccw_up.start == (0.0, 0.0)
    assert ccw_up.waypoints[1] == (10.0, 0.0)
    assert ccw_up.goal[1] == pytest.approx(3.0)
    assert len(all_patterns(cell, router, 1.0)) == 8


def test_triangle_and_thin_cell_pattern_counts():
    tri, router, _ = cell_and_router([(0, 0), (10, 0), (0, 10)])
    assert len(all_patterns(tri, router, 1.0)) == 12
    thin, router, _ = cell_and_router(rect(10, 0.5))
    pats = all_patterns(thin, router, 1.0, directions=(0.0,))
    assert len(pats) == 2
    assert {p.start for p in pats} == {(0.0, 0.25), (10.0, 0.25)}


def test_transitions_route_around_holes():
    # the cell's right side is cut by a hole, so chord ends are joined via the visibility graph
    outer = [(0, 0), (10, 0), (10, 10), (0, 10)]
    hole = [(6, 4), (8, 4), (8, 6), (6, 6)]
    pwh = PolygonWithHoles.from_coords(outer, [hole])
    router = PathTable(build_graph(pwh), pwh, CostModel("distance"))
    cell = Cell(0, PolygonWithHoles.from_coords([(0, 0), (6, 0), (6, 10), (0, 10)]).outer, 0.0)
    for p in all_patterns(cell, router, 2.0):
        for seg in zip(p.waypoints[:-1], p.waypoints[1:]):
            assert contains(pwh, seg, 0)


def test_patterns_contained_reversible_and_cover_rectangles():
    shapes = [(rect(10, 3), True), (rect(7.3, 4.1), True),
              ([(0, 0), (10, 0), (12, 6), (3, 9)], False), ([(0, 0), (10, 0), (0, 10)], False)]
    for coords, is_rect in shapes:
        cell, router, pwh = cell_and_router(coords)
        model = CostModel("distance")
        for p in all_patterns(cell, router, 1.0):
            for seg in zip(p.waypoints[:-1], p.waypoints[1:]):
                assert contains(pwh, seg, 0)
            r = p.reversed()
            assert (r.start, r.goal) == (p.goal, p.start)
            assert model.polyline_cost(r.polyline) == pytest.approx(model.polyline_cost(p.polyline))
            assert coverage(cell, p.sweep_segments(), 1.0, 1.0) == 1.0
            if is_rect:
                assert coverage(cell, p.sweep_segments(), 1.0, 0.5) >= 0.999


@pytest.mark.xfail(strict=True, reason="chord rule leaves uncovered wedges at pointed cell ends; see decisions ledger")
def test_half_sweep_distance_coverage_on_triangle():
    cell, router, _ = cell_and_router([(0, 0), (10, 0), (0, 10)])
    for p in all_patterns(cell, router, 1.0):
        assert coverage(cell, p.sweep_segments(), 1.0, 0.5) >= 0.999


@settings(max_examples=40, deadline=None)
@given(st.floats(1, 20), st.floats(1, 20), st.floats(0.5, 6))
def test_axis_aligned_rectangle_coverage(w, h, sd):
    cell, router, _ = cell_and_router(rect(w, h))
    for p in permutations(cell, 0.0, router, sd)[:1]:
        assert coverage(cell, p.sweep_segments(), sd, sd / 2) >= 0.999


def test_chord_coverage_matches_raster():
    for coords in (rect(10, 3), [(0, 0), (10, 0), (0, 10)], [(0, 0), (5, 0), (9, 40), (4, 40)]):
        cell, _, _ = cell_and_router(coords)
        for d in sweepable_directions(cell):
            chords = straight_segments(cell, d, 2.0)
            segs = [(a, b) if a != b else (a, (a[0] + 1e-12, a[1])) for a, b in chords]
            assert chord_coverage(cell, d, 2.0) == pytest.approx(coverage(cell, segs, 2.0, 1.0), abs=0.01)


def test_covering_directions_drop_tilted_wedges():
    # a short edge almost parallel to the long sides gives a nearly vertical,
    # slightly tilted sweep direction whose end chords collapse to vertices
    cell, _, _ = cell_and_router([(0, 0), (5, 0), (5, 40), (0, 40), (-0.5, 35)])
    tilted = math.atan2(5, 0.5)
    assert any(abs(d - tilted) < 1e-9 for d in sweepable_directions(cell))
    assert chord_coverage(cell, tilted, 4.0) < 0.9
    kept = covering_directions(cell, 4.0)
    assert kept == pytest.approx((0.0, math.pi / 2))
    rect_cell, _, _ = cell_and_router(rect(10, 3))
    assert covering_directions(rect_cell, 1.0) == sweepable_directions(rect_cell)
