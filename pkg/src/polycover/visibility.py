"""Reduced visibility graph and Euclidean shortest paths in a polygon with holes."""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

import numpy as np

from .cost import CostKind, CostModel
from .errors import InvalidInputError, NoPathError
from .geometry import (
    EPS,
    Orientation,
    Point,
    PolygonWithHoles,
    Polyline,
    orientation,
    points_in_free_space,
    segments_free,
)


def reflex_vertices(pwh: PolygonWithHoles) -> list[Point]:
    """Non-convex outer vertices and convex hole vertices.

    With the outer ring CCW and holes CW both are exactly the right turns.
    """
    out = []
    for ring in pwh.rings:
        v = ring.vertices
        n = len(v)
        for i in range(n):
            if orientation(v[i - 1], v[i], v[(i + 1) % n]) == Orientation.CW:
                out.append(v[i])
    return out


@dataclass
class VisibilityGraph:
    nodes: np.ndarray  # (V, 2)
    adjacency: list[list[tuple[int, float]]]
    pwh: PolygonWithHoles = field(repr=False)
    _apsp: tuple | None = field(default=None, repr=False)

    @property
    def edge_count(self) -> int:
        return sum(len(a) for a in self.adjacency) // 2

    def all_pairs(self) -> tuple[np.ndarray, np.ndarray]:
        """Floyd-Warshall distances and next-hop table over the graph nodes."""
        if self._apsp is None:
            V = len(self.nodes)
            dist = np.full((V, V), np.inf)
            nxt = np.full((V, V), -1, dtype=np.int64)
            for i in range(V):
                dist[i, i] = 0.0
                nxt[i, i] = i
                for j, w in self.adjacency[i]:
                    dist[i, j] = w
                    nxt[i, j] = j
            for k in range(V):
                alt = dist[:, k : k + 1] + dist[k : k + 1, :]
                better = alt < dist
                if better.any():
                    dist = np.where(better, alt, dist)
                    nxt = np.where(better, nxt[:, k : k + 1], nxt)
            self._apsp = (dist, nxt)
        return self._apsp

    def node_route(self, u: int, v: int) -> list[int]:
        dist, nxt = self.all_pairs()
        if not np.isfinite(dist[u, v]):
            raise NoPathError(f"graph nodes {u} and {v} are disconnected")
        route = [u]
        while route[-1] != v:
            route.append(int(nxt[route[-1], v]))
        return route


def build_graph(pwh: PolygonWithHoles) -> VisibilityGraph:
    """All mutually visible pairs of reduced-graph nodes."""
    pts = reflex_vertices(pwh)
    nodes = np.array(pts, dtype=float).reshape(-1, 2)
    V = len(nodes)
    adjacency: list[list[tuple[int, float]]] = [[] for _ in range(V)]
    if V > 1:
        ii, jj = np.triu_indices(V, k=1)
        free = segments_free(pwh, nodes[ii], nodes[jj])
        for i, j in zip(ii[free].tolist(), jj[free].tolist()):
            w = math.dist(pts[i], pts[j])
            adjacency[i].append((j, w))
            adjacency[j].append((i, w))
    return VisibilityGraph(nodes, adjacency, pwh)


def visible_nodes(graph: VisibilityGraph, p: Point, pwh: PolygonWithHoles | None = None) -> list[int]:
    """Indices of graph nodes whose connecting segment to ``p`` is free."""
    pwh = pwh if pwh is not None else graph.pwh
    if not points_in_free_space(pwh, [p])[0]:
        raise InvalidInputError(f"point {p} is outside the free space")
    V = len(graph.nodes)
    if V == 0:
        return []
    free = segments_free(pwh, np.repeat([p], V, axis=0), graph.nodes)
    return np.nonzero(free)[0].tolist()


def shortest_path(graph: VisibilityGraph, pwh: PolygonWithHoles, start: Point, goal: Point,
                  heuristic: bool = True, stats: dict | None = None) -> Polyline:
    """Euclidean shortest path by A* with the straight-line heuristic.

    Equal-length alternatives resolve to the smallest node-index sequence.
    ``heuristic=False`` runs plain Dijkstra; ``stats`` receives the number
    of expanded graph nodes under ``"expanded"``.
    """
    start = (float(start[0]), float(start[1]))
    goal = (float(goal[0]), float(goal[1]))
    inside = points_in_free_space(pwh, [start, goal])
    if not inside.all():
        raise InvalidInputError("shortest_path endpoint outside the free space")
    if start == goal:
        return Polyline((start,))
    if segments_free(pwh, [start], [goal])[0]:
        return Polyline((start, goal))
    nodes = graph.nodes
    vis_s = visible_nodes(graph, start, pwh)
    vis_g = set(visible_nodes(graph, goal, pwh))

    def h(i: int) -> float:
        return math.dist(nodes[i], goal) if heuristic else 0.0

    GOAL = len(nodes)
    best: dict[int, float] = {}
    heap: list[tuple[float, tuple[int, ...], float]] = []
    for i in vis_s:
        g = math.dist(start, nodes[i])
        heapq.heappush(heap, (g + h(i), (i,), g))
    closed: set[int] = set()
    while heap:
        f, route, g = heapq.heappop(heap)
        u = route[-1]
        if u == GOAL:
            if stats is not None:
                stats["expanded"] = len(closed)
            pts = [start] + [tuple(nodes[i].tolist()) for i in route[:-1]] + [goal]
            return Polyline.of(pts)
        if u in closed:
            continue
        closed.add(u)
        if u in vis_g:
            gg = g + math.dist(nodes[u], goal)
            heapq.heappush(heap, (gg, route + (GOAL,), gg))
        for v, w in graph.adjacency[u]:
            if v in closed:
                continue
            gv = g + w
            if gv < best.get(v, math.inf) + 1e-12:
                best[v] = min(gv, best.get(v, math.inf))
                heapq.heappush(heap, (gv + h(v), route + (v,), gv))
    raise NoPathError(f"no path between {start} and {goal}")


class PathTable:
    """Batched shortest-path costs between point sets.

    Used to wire the coverage graph, where every pattern exit needs a path
    to every other pattern entry. Visibility of query points is computed once
    per point and combined with all-pairs distances over the graph nodes.
    """

    def __init__(self, graph: VisibilityGraph, pwh: PolygonWithHoles, model: CostModel):
        self.graph = graph
        self.pwh = pwh
        self.model = model
        dist, _ = graph.all_pairs()
        self.node_dist = dist
        V = len(graph.nodes)
        # cost of the Euclidean-shortest route between each pair of nodes
        self.node_cost = np.full((V, V), np.inf)
        for u in range(V):
            for v in range(V):
                if np.isfinite(dist[u, v]):
                    self.node_cost[u, v] = self._route_cost(graph.node_route(u, v))

    def _route_cost(self, route: list[int]) -> float:
        pts = self.graph.nodes[route]
        lengths = np.hypot(*np.diff(pts, axis=0).T) if len(route) > 1 else np.zeros(0)
        if self.model.kind is CostKind.WAYPOINTS:
            return float(len(route))
        return float(self.model.segment_costs(lengths).sum()) if len(lengths) else 0.0

    def links(self, pts: np.ndarray) -> np.ndarray:
        """(P, V) straight distances to visible nodes, ``inf`` where blocked."""
        pts = np.asarray(pts, dtype=float).reshape(-1, 2)
        nodes = self.graph.nodes
        P, V = len(pts), len(nodes)
        out = np.full((P, V), np.inf)
        if P == 0 or V == 0:
            return out
        a = np.repeat(pts, V, axis=0)
        b = np.tile(nodes, (P, 1))
        free = segments_free(self.pwh, a, b).reshape(P, V)
        d = np.hypot(a[:, 0] - b[:, 0], a[:, 1] - b[:, 1]).reshape(P, V)
        out[free] = d[free]
        return out

    def _leg_cost(self, d: np.ndarray) -> np.ndarray:
        if self.model.kind is CostKind.WAYPOINTS:
            return np.zeros_like(d)
        return self.model.segment_costs(d)

    def costs(self, src: np.ndarray, dst: np.ndarray, src_links=None, dst_links=None):
        """Transition costs between every ``src`` and every ``dst`` point.

        Returns ``(cost, length, via)`` where ``via[i, j]`` is ``-1`` for a
        direct segment, otherwise ``u * V + v`` for the route entering the
        graph at node ``u`` and leaving at node ``v``.
        """
        src = np.asarray(src, dtype=float).reshape(-1, 2)
        dst = np.asarray(dst, dtype=float).reshape(-1, 2)
        P, Q, V = len(src), len(dst), len(self.graph.nodes)
        ls = self.links(src) if src_links is None else src_links
        ld = self.links(dst) if dst_links is None else dst_links
        direct_len = np.hypot(src[:, None, 0] - dst[None, :, 0], src[:, None, 1] - dst[None, :, 1])
        ai, bj = np.meshgrid(np.arange(P), np.arange(Q), indexing="ij")
        free = segments_free(self.pwh, src[ai.ravel()], dst[bj.ravel()]).reshape(P, Q)
        length = np.where(free, direct_len, np.inf)
        cost = np.full((P, Q), np.inf)
        if self.model.kind is CostKind.WAYPOINTS:
            cost[free] = np.where(direct_len[free] > 0, 2.0, 1.0)
        else:
            cost[free] = self.model.segment_costs(direct_len[free])
        via = np.full((P, Q), -1, dtype=np.int64)
        if V and not free.all():
            lcs = self._leg_cost(np.where(np.isfinite(ls), ls, 0.0))
            lcd = self._leg_cost(np.where(np.isfinite(ld), ld, 0.0))
            extra = 2.0 if self.model.kind is CostKind.WAYPOINTS else 0.0
            for i in np.nonzero(~free.all(axis=1))[0]:
                # best graph entry u for every exit node v
                tot = ls[i][:, None] + self.node_dist  # (u, v)
                u_best = np.argmin(tot, axis=0)
                e_len = tot[u_best, np.arange(V)]
                e_cost = lcs[i][u_best] + self.node_cost[u_best, np.arange(V)]
                blocked = np.nonzero(~free[i])[0]
                full = e_len[None, :] + ld[blocked]  # (q, v)
                v_best = np.argmin(full, axis=1)
                best_len = full[np.arange(len(blocked)), v_best]
                ok = np.isfinite(best_len)
                rows = blocked[ok]
                vb = v_best[ok]
                length[i, rows] = best_len[ok]
                cost[i, rows] = e_cost[vb] + lcd[rows, vb] + extra
                via[i, rows] = u_best[vb] * V + vb
        return cost, length, via

    def route(self, a: Point, b: Point, via: int) -> Polyline:
        """Rebuild the polyline encoded by a ``via`` value from :meth:`costs`."""
        a = (float(a[0]), float(a[1]))
        b = (float(b[0]), float(b[1]))
        if via < 0:
            return Polyline((a,)) if a == b else Polyline((a, b))
        V = len(self.graph.nodes)
        u, v = divmod(int(via), V)
        mid = [tuple(self.graph.nodes[k].tolist()) for k in self.graph.node_route(u, v)]
        return Polyline.of([a, *mid, b])

    def path(self, a: Point, b: Point) -> tuple[Polyline, float]:
        cost, length, via = self.costs(np.array([a]), np.array([b]))
        if not np.isfinite(length[0, 0]):
            raise NoPathError(f"no path between {a} and {b}")
        return self.route(a, b, int(via[0, 0])), float(cost[0, 0])
