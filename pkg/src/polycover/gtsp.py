"""E-GTSP adjacency graph over sweep patterns.

Node 0 is the start terminal and the last node is the goal terminal; each
is alone in its cluster. Every decomposition cell owns one cluster holding
its sweep patterns. ``cost[i, j]`` is the transition cost from the exit of
``i`` to the entry of ``j`` plus the intrinsic cost of ``j``; missing arcs
(same cluster, into the start, out of the goal, start to goal) are ``inf``.
"""
from __future__ import annotations

import io
from dataclasses import dataclass, field, replace

import numpy as np

from .cost import CostModel
from .errors import NoPathError
from .geometry import Point, Polyline
from .sweep import SweepPattern, all_patterns

ABSENT_ARC = 1e18


@dataclass(frozen=True)
class Node:
    id: int
    cluster_id: int
    entry: Point
    exit: Point
    intrinsic_cost: float
    pattern: SweepPattern | None = None  # None for terminals

    @property
    def is_terminal(self) -> bool:
        return self.pattern is None


@dataclass
class AdjacencyGraph:
    nodes: list[Node]
    clusters: list[list[int]]  # clusters[0] = start, clusters[-1] = goal
    cost: np.ndarray
    via: np.ndarray | None = None
    router: object = field(default=None, repr=False)

    @property
    def start(self) -> int:
        return self.clusters[0][0]

    @property
    def goal(self) -> int:
        return self.clusters[-1][0]

    @property
    def cell_clusters(self) -> list[list[int]]:
        return self.clusters[1:-1]

    @property
    def arc_count(self) -> int:
        return int(np.isfinite(self.cost).sum())

    def transition(self, i: int, j: int) -> Polyline:
        """Stored free-space path from the exit of ``i`` to the entry of ``j``."""
        a, b = self.nodes[i].exit, self.nodes[j].entry
        return self.router.route(a, b, int(self.via[i, j]))

    def path_cost(self, seq) -> float:
        return float(sum(self.cost[seq[k], seq[k + 1]] for k in range(len(seq) - 1)))


def make_nodes(cells, router, model: CostModel, sweep_distance: float, start: Point, goal: Point,
               patterns_per_cell=None):
    """Terminal and sweep-pattern nodes with their cluster partition."""
    nodes = [Node(0, 0, start, start, 0.0)]
    clusters = [[0]]
    for k, cell in enumerate(cells):
        pats = patterns_per_cell[k] if patterns_per_cell is not None else all_patterns(cell, router, sweep_distance)
        ids = []
        for p in pats:
            nid = len(nodes)
            nodes.append(Node(nid, k + 1, p.start, p.goal, model.polyline_cost(p.polyline), p))
            ids.append(nid)
        clusters.append(ids)
    gid = len(nodes)
    nodes.append(Node(gid, len(clusters), goal, goal, 0.0))
    clusters.append([gid])
    return nodes, clusters


def _unique_points(pts):
    index: dict = {}
    inverse = []
    for p in pts:
        inverse.append(index.setdefault(p, len(index)))
    return np.array(list(index), dtype=float).reshape(-1, 2), np.array(inverse, dtype=np.int64)


def wire(nodes: list[Node], clusters: list[list[int]], router) -> tuple[np.ndarray, np.ndarray]:
    """Dense arc costs and route codes between nodes of different clusters."""
    n = len(nodes)
    exits, exit_inv = _unique_points([nd.exit for nd in nodes])
    entries, entry_inv = _unique_points([nd.entry for nd in nodes])
    tcost, tlen, tvia = router.costs(exits, entries)
    cost = tcost[exit_inv][:, entry_inv] + np.array([nd.intrinsic_cost for nd in nodes])[None, :]
    via = tvia[exit_inv][:, entry_inv]
    length = tlen[exit_inv][:, entry_inv]
    cid = np.array([nd.cluster_id for nd in nodes])
    absent = cid[:, None] == cid[None, :]
    start, goal = clusters[0][0], clusters[-1][0]
    absent[:, start] = True
    absent[goal, :] = True
    absent[start, goal] = True
    unreachable = ~absent & ~np.isfinite(length)
    if unreachable.any():
        i, j = map(int, np.argwhere(unreachable)[0])
        raise NoPathError(f"free space disconnected between node {i} exit {nodes[i].exit} and node {j} entry {nodes[j].entry}")
    cost[absent] = np.inf
    via[absent] = -1
    return cost, via


def build_graph(cells, router, model: CostModel, sweep_distance: float, start: Point, goal: Point) -> AdjacencyGraph:
    """Nodes for every sweep pattern of every cell, densely wired."""
    nodes, clusters = make_nodes(cells, router, model, sweep_distance, start, goal)
    cost, via = wire(nodes, clusters, router)
    return AdjacencyGraph(nodes, clusters, cost, via, router)


def dominated_nodes(nodes: list[Node], clusters: list[list[int]], router) -> set[int]:
    """Nodes whose coverage is cheaper done as a detour through a sibling.

    ``i`` is dropped when going entry(i) -> entry(j), covering with ``j`` and
    returning exit(j) -> exit(i) costs no more than ``i`` itself. Nodes are
    visited in id order and a node only prunes siblings while it survives,
    so every cluster keeps at least one node.
    """
    pruned: set[int] = set()
    for members in clusters[1:-1]:
        if len(members) < 2:
            continue
        entries = np.array([nodes[i].entry for i in members])
        exits = np.array([nodes[i].exit for i in members])
        to_entry, _, _ = router.costs(entries, entries)  # [i, j]: entry_i -> entry_j
        from_exit, _, _ = router.costs(exits, exits)  # [j, i]: exit_j -> exit_i
        t = np.array([nodes[i].intrinsic_cost for i in members])
        for a, i in enumerate(members):
            for b, j in enumerate(members):
                if a == b or j in pruned:
                    continue
                if to_entry[a, b] + t[b] + from_exit[b, a] <= t[a]:
                    pruned.add(i)
                    break
    return pruned


def _subgraph(g: AdjacencyGraph, keep: list[int]) -> AdjacencyGraph:
    remap = {old: new for new, old in enumerate(keep)}
    nodes = [replace(g.nodes[old], id=new) for new, old in enumerate(keep)]
    clusters = [[remap[i] for i in members if i in remap] for members in g.clusters]
    idx = np.array(keep)
    via = g.via[np.ix_(idx, idx)] if g.via is not None else None
    return AdjacencyGraph(nodes, clusters, g.cost[np.ix_(idx, idx)], via, g.router)


def prune_dominated(g: AdjacencyGraph, router=None) -> AdjacencyGraph:
    router = router if router is not None else g.router
    pruned = dominated_nodes(g.nodes, g.clusters, router)
    keep = [i for i in range(len(g.nodes)) if i not in pruned]
    return _subgraph(g, keep)


def restrict(g: AdjacencyGraph, keep_ids) -> AdjacencyGraph:
    """Subgraph with only the given sweep nodes (terminals always kept)."""
    wanted = set(keep_ids) | {g.start, g.goal}
    return _subgraph(g, [i for i in range(len(g.nodes)) if i in wanted])


def to_gtsp_text(g: AdjacencyGraph) -> str:
    """Plain-text asymmetric GTSP matrix dump.

    Header ``nodes clusters``, one line per cluster with its node ids, then
    one dense cost row per node; absent arcs are written as ``1e18``.
    """
    out = io.StringIO()
    n = len(g.nodes)
    out.write(f"{n} {len(g.clusters)}\n")
    for members in g.clusters:
        out.write(" ".join(map(str, members)) + "\n")
    for i in range(n):
        row = np.where(np.isfinite(g.cost[i]), g.cost[i], ABSENT_ARC)
        out.write(" ".join(repr(float(v)) for v in row) + "\n")
    return out.getvalue()


def from_gtsp_text(text: str) -> AdjacencyGraph:
    lines = text.strip().splitlines()
    n, m = map(int, lines[0].split())
    clusters = [[int(t) for t in lines[1 + k].split()] for k in range(m)]
    cost = np.array([[float(t) for t in lines[1 + m + i].split()] for i in range(n)])
    cost[cost >= ABSENT_ARC] = np.inf
    cluster_of = {i: k for k, members in enumerate(clusters) for i in members}
    nodes = [Node(i, cluster_of[i], (0.0, 0.0), (0.0, 0.0), 0.0) for i in range(n)]
    return AdjacencyGraph(nodes, clusters, cost)
