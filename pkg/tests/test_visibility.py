import math

import numpy as np
import pytest

from polycover.bench.generate import generate_maps
from polycover.cost import CostModel
from polycover.errors import InvalidInputError, NoPathError
from polycover.geometry import PolygonWithHoles, contains
from polycover.visibility import PathTable, build_graph, reflex_vertices, shortest_path, visible_nodes

from .conftest import U_SHAPE
from .oracles import full_visibility_distance, random_free_points


def node_set(graph):
    return sorted(map(tuple, graph.nodes.tolist()))


def test_convex_polygon_has_empty_graph(square):
    g = build_graph(square)
    assert len(g.nodes) == 0 and g.edge_count == 0
    assert visible_nodes(g, (3, 3), square) == []


def test_square_with_hole_graph(square_hole):
    g = build_graph(square_hole)
    assert node_set(g) == [(4, 4), (4, 6), (6, 4), (6, 6)]
    assert g.edge_count == 4
    for i, adj in enumerate(g.adjacency):
        for j, w in adj:
            assert w == pytest.approx(math.dist(g.nodes[i], g.nodes[j]), abs=1e-9)
            assert contains(square_hole, (tuple(g.nodes[i]), tuple(g.nodes[j])), 0)


def test_u_shape_graph():
    pwh = PolygonWithHoles.from_coords(U_SHAPE)
    g = build_graph(pwh)
    assert node_set(g) == [(1, 1), (2, 1)]
    assert g.edge_count == 1
    assert sorted(reflex_vertices(pwh)) == [(1.0, 1.0), (2.0, 1.0)]


def test_visible_nodes(square_hole):
    g = build_graph(square_hole)
    vis = {tuple(g.nodes[i]) for i in visible_nodes(g, (1, 5), square_hole)}
    assert vis == {(4, 4), (4, 6)}
    at_node = {tuple(g.nodes[i]) for i in visible_nodes(g, (4, 4), square_hole)}
    assert at_node == {(4, 4), (4, 6), (6, 4)}
    with pytest.raises(InvalidInputError):
        visible_nodes(g, (5, 5), square_hole)


def test_shortest_path_examples(square_hole):
    g = build_graph(square_hole)
    p = shortest_path(g, square_hole, (1, 5), (9, 5))
    assert p.length == pytest.approx(2 + 2 * math.sqrt(10))
    assert p.waypoints == ((1.0, 5.0), (4.0, 6.0), (6.0, 6.0), (9.0, 5.0))
    assert shortest_path(g, square_hole, (1, 1), (9, 1)).waypoints == ((1.0, 1.0), (9.0, 1.0))
    same = shortest_path(g, square_hole, (2, 2), (2, 2))
    assert same.waypoints == ((2.0, 2.0),) and same.length == 0
    with pytest.raises(InvalidInputError):
        shortest_path(g, square_hole, (1, 1), (5, 5))


def test_disconnected_free_space_raises():
    # a thin wall of two holes cannot disconnect a PWH, so use a degenerate table query
    pwh = PolygonWithHoles.from_coords([(0, 0), (10, 0), (10, 10), (0, 10)])
    table = PathTable(build_graph(pwh), pwh, CostModel())
    with pytest.raises(NoPathError):
        table.path((1, 1), (20, 20))


def test_shortest_paths_match_full_graph_dijkstra():
    rng = np.random.default_rng(5)
    maps = [m.polygon() for m in generate_maps(10, (1, 8), seed=9)]
    for pwh in maps:
        g = build_graph(pwh)
        table = PathTable(g, pwh, CostModel("distance"))
        pts = random_free_points(pwh, rng, 6)
        for a, b in zip(pts[:3], pts[3:]):
            ref = full_visibility_distance(pwh, a, b)
            stats_a, stats_d = {}, {}
            p = shortest_path(g, pwh, a, b, stats=stats_a)
            back = shortest_path(g, pwh, b, a)
            assert p.length == pytest.approx(ref, rel=1e-6)
            assert back.length == pytest.approx(p.length, abs=1e-9)
            assert table.path(a, b)[0].length == pytest.approx(ref, rel=1e-6)
            for s in zip(p.waypoints[:-1], p.waypoints[1:]):
                assert contains(pwh, s, 0)
            shortest_path(g, pwh, a, b, heuristic=False, stats=stats_d)
            assert stats_a.get("expanded", 0) <= stats_d.get("expanded", 0)


def test_path_table_costs_match_polyline_costs():
    pwh = generate_maps(1, 5, seed=2)[0].polygon()
    model = CostModel()
    table = PathTable(build_graph(pwh), pwh, model)
    pts = np.array(random_free_points(pwh, np.random.default_rng(1), 12))
    cost, length, via = table.costs(pts[:6], pts[6:])
    for i in range(6):
        for j in range(6):
            route = table.route(tuple(pts[i]), tuple(pts[6 + j]), int(via[i, j]))
            assert route.length == pytest.approx(length[i, j], rel=1e-9)
            assert model.polyline_cost(route) == pytest.approx(cost[i, j], rel=1e-9)
