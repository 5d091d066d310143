import math

import numpy as np
import pytest
import shapely
from shapely.geometry import Polygon, box

from polycover.bench.generate import generate_maps
from polycover.decomposition import (
    Cell,
    DecompositionKind,
    altitude_sum,
    best_decomposition,
    decompose,
    decompose_bcd,
    decompose_tcd,
)
from polycover.errors import GeometryError
from polycover.geometry import PolygonWithHoles, Ring, edge_directions, is_monotone

from .conftest import L_SHAPE, SQUARE


def cell_polys(cells):
    return [Polygon(c.ring.vertices) for c in cells]


def assert_partition(pwh, cells, rel=1e-6):
    polys = cell_polys(cells)
    # snap rounding: the cascaded union is not robust on near-parallel slivers
    union = shapely.union_all(polys, grid_size=1e-9)
    region = pwh.shapely
    assert union.symmetric_difference(region).area <= rel * region.area
    assert sum(p.area for p in polys) == pytest.approx(region.area, rel=rel)
    for i in range(len(polys)):
        for j in range(i):
            assert polys[i].intersection(polys[j]).area <= 1e-9 * region.area
    for c in cells:
        assert is_monotone(c.ring, c.monotone_axis)


def as_boxes(cells):
    return sorted(tuple(round(v, 9) for v in Polygon(c.ring.vertices).bounds) for c in cells)


def test_square_is_one_cell(square):
    # BCD has no split events in any direction; TCD cuts at every vertex, so
    # it only keeps the square whole along an edge direction
    cases = [(decompose_bcd, d) for d in (0.0, 0.3, 1.0, math.pi / 2)] + [(decompose_tcd, 0.0), (decompose_tcd, math.pi / 2)]
    for fn, d in cases:
        cells = fn(square, d)
        assert len(cells) == 1
        assert Polygon(cells[0].ring.vertices).symmetric_difference(square.shapely).area < 1e-9


def test_bcd_square_with_hole(square_hole):
    cells = decompose_bcd(square_hole, 0.0)
    assert as_boxes(cells) == [(0, 0, 4, 10), (4, 0, 6, 4), (4, 6, 6, 10), (6, 0, 10, 10)]
    for c in cells:  # rectangles, not just bounding boxes
        assert Polygon(c.ring.vertices).area == pytest.approx(box(*Polygon(c.ring.vertices).bounds).area)
    assert altitude_sum(cells) == pytest.approx(12.0)
    assert_partition(square_hole, cells)


def test_tcd_square_with_hole(square_hole):
    cells = decompose_tcd(square_hole, 0.0)
    assert as_boxes(cells) == [(0, 0, 4, 10), (4, 0, 6, 4), (4, 6, 6, 10), (6, 0, 10, 10)]


def test_bcd_two_holes(two_holes):
    cells = decompose_bcd(two_holes, 0.0)
    assert len(cells) == 7
    assert_partition(two_holes, cells)


def test_l_shape():
    pwh = PolygonWithHoles.from_coords(L_SHAPE)
    tcd = decompose_tcd(pwh, 0.0)
    assert as_boxes(tcd) == [(0, 0, 1, 1), (1, 0, 2, 2)]
    assert len(decompose_bcd(pwh, 0.0)) == 1


def test_altitude_sum_examples():
    rect = Cell(0, Ring.from_points([(0, 0), (100, 0), (100, 50), (0, 50)]), math.pi / 2)
    assert altitude_sum([rect]) == pytest.approx(50.0)
    assert altitude_sum([]) == 0


def test_best_decomposition_examples(square, square_hole):
    d = best_decomposition(square, "bcd")
    assert d.scan_direction == 0.0 and d.altitude_sum == pytest.approx(10.0)
    d = best_decomposition(square_hole, DecompositionKind.BCD)
    assert d.scan_direction == 0.0 and d.altitude_sum == pytest.approx(12.0)
    assert len(d.cells) == 4
    c, s = math.cos(math.pi / 4), math.sin(math.pi / 4)
    rect = [(x * c - y * s, x * s + y * c) for x, y in [(0, 0), (100, 0), (100, 10), (0, 10)]]
    d = best_decomposition(PolygonWithHoles.from_coords(rect), "bcd")
    assert d.altitude_sum == pytest.approx(10.0)
    assert math.isclose(d.scan_direction, 3 * math.pi / 4)


def test_zero_area_rejected():
    pwh = PolygonWithHoles(Ring(((0.0, 0.0), (1.0, 0.0), (2.0, 0.0))))
    with pytest.raises(GeometryError):
        decompose_bcd(pwh, 0.0)


def random_maps(n, seed):
    return [m.polygon() for m in generate_maps(n, (0, 6), seed)]


def test_partition_properties_on_random_maps():
    rng = np.random.default_rng(0)
    for pwh in random_maps(100, seed=21):
        dirs = edge_directions(pwh)
        d = dirs[int(rng.integers(len(dirs)))]
        bcd = decompose(pwh, d, "bcd")
        tcd = decompose(pwh, d, "tcd")
        assert_partition(pwh, bcd, rel=1e-5)
        assert_partition(pwh, tcd, rel=1e-5)
        assert len(bcd) <= len(tcd)
        assert all(c.monotone_axis == d for c in bcd)


def test_best_decomposition_is_minimum_over_edge_directions():
    for pwh in random_maps(8, seed=4):
        best = best_decomposition(pwh, "bcd")
        sums = [altitude_sum(decompose(pwh, d, "bcd")) for d in edge_directions(pwh)]
        assert best.altitude_sum == pytest.approx(min(sums), rel=1e-12)
        assert best.altitude_sum == pytest.approx(altitude_sum(best.cells))
