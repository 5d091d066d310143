import itertools

import numpy as np
import pytest

from polycover.geometry import PolygonWithHoles
from polycover.gtsp import AdjacencyGraph, Node

SQUARE = [(0, 0), (10, 0), (10, 10), (0, 10)]
HOLE = [(4, 4), (6, 4), (6, 6), (4, 6)]
U_SHAPE = [(0, 0), (3, 0), (3, 2), (2, 2), (2, 1), (1, 1), (1, 2), (0, 2)]
L_SHAPE = [(0, 0), (2, 0), (2, 2), (1, 2), (1, 1), (0, 1)]


@pytest.fixture
def square():
    return PolygonWithHoles.from_coords(SQUARE)


@pytest.fixture
def square_hole():
    return PolygonWithHoles.from_coords(SQUARE, [HOLE])


@pytest.fixture
def two_holes():
    return PolygonWithHoles.from_coords(
        SQUARE, [[(2, 2), (3, 2), (3, 3), (2, 3)], [(7, 7), (8, 7), (8, 8), (7, 8)]]
    )


def random_gtsp(rng, m, max_nodes, low=1.0, high=100.0):
    """Random asymmetric E-GTSP instance with ``m`` cell clusters of 1..max_nodes nodes."""
    clusters = [[0]]
    nid = 1
    for _ in range(m):
        size = int(rng.integers(1, max_nodes + 1))
        clusters.append(list(range(nid, nid + size)))
        nid += size
    clusters.append([nid])
    n = nid + 1
    cost = rng.uniform(low, high, (n, n))
    cid = np.zeros(n, dtype=int)
    for c, members in enumerate(clusters):
        cid[members] = c
    cost[cid[:, None] == cid[None, :]] = np.inf
    cost[:, 0] = np.inf
    cost[n - 1, :] = np.inf
    nodes = [Node(i, int(cid[i]), (0.0, 0.0), (0.0, 0.0), 0.0) for i in range(n)]
    return AdjacencyGraph(nodes, clusters, cost)


def brute_force_gtsp(g):
    """Minimum over every cluster order and every node choice (tensor enumeration)."""
    C = np.where(np.isfinite(g.cost), g.cost, np.inf)
    clusters = g.cell_clusters
    if not clusters:
        return float(C[g.start, g.goal])
    best = np.inf
    for perm in itertools.permutations(range(len(clusters))):
        layers = [np.array(clusters[c]) for c in perm]
        T = C[g.start, layers[0]]
        for a, b in zip(layers[:-1], layers[1:]):
            T = T[..., None] + C[np.ix_(a, b)]
        T = T + C[layers[-1], g.goal]
        best = min(best, float(T.min()))
    return best


def held_karp(g):
    """Independent subset DP over (visited clusters, last node), for larger checks."""
    C = g.cost
    clusters = [np.array(c) for c in g.cell_clusters]
    m = len(clusters)
    dp = np.full((1 << m, len(g.nodes)), np.inf)
    for k, members in enumerate(clusters):
        dp[1 << k, members] = C[g.start, members]
    for mask in range(1, 1 << m):
        row = dp[mask]
        for k, members in enumerate(clusters):
            if mask >> k & 1:
                continue
            step = (row[:, None] + C[:, members]).min(axis=0)
            nm = mask | 1 << k
            dp[nm, members] = np.minimum(dp[nm, members], step)
    return float((dp[(1 << m) - 1] + C[:, g.goal]).min())


def planning_graph(pwh, sweep_distance=4.0, kind="bcd", model=None, start=None):
    """Unpruned E-GTSP graph and router for a region, built from the library stages."""
    from polycover.cost import CostModel
    from polycover.decomposition import best_decomposition
    from polycover.gtsp import build_graph
    from polycover.visibility import PathTable, build_graph as visibility_graph

    model = model or CostModel()
    router = PathTable(visibility_graph(pwh), pwh, model)
    cells = best_decomposition(pwh, kind).cells
    p = start or pwh.outer.vertices[0]
    return build_graph(cells, router, model, sweep_distance, p, p), router
