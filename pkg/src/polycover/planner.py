"""End-to-end coverage planning and the fixed-pattern baseline."""
from __future__ import annotations

import math
import time
from contextlib import contextmanager
from dataclasses import dataclass, field

import numpy as np

from .cost import CostModel
from .decomposition import Decomposition, DecompositionKind, altitude_sum, best_decomposition, decompose
from .errors import InvalidInputError, PlanningError
from .geometry import Point, PolygonWithHoles, edge_directions, offset_inward, points_in_free_space
from .gtsp import AdjacencyGraph, dominated_nodes, make_nodes, wire, _subgraph
from .solvers import DEFAULT_STATE_BUDGET, Solution, solve_exact, solve_memetic
from .sweep import all_patterns, covering_directions, permutations
from .visibility import PathTable, build_graph as build_visibility_graph

STAGES = ("cells", "sweeps", "nodes", "pruning", "edges", "solve")


@dataclass
class PlannerConfig:
    decomposition: DecompositionKind = DecompositionKind.BCD
    cost: CostModel = field(default_factory=CostModel)
    sweep_distance: float = 5.0
    wall_distance: float = 0.0
    solver: str = "memetic"
    seed: int = 0
    start: Point | None = None
    goal: Point | None = None
    prune: bool = True
    time_limit: float | None = 60.0  # per solver call
    state_budget: int = DEFAULT_STATE_BUDGET
    min_coverage: float | None = 0.999  # None keeps every sweepable direction

    def __post_init__(self):
        self.decomposition = DecompositionKind(self.decomposition)
        if not self.sweep_distance > 0:
            raise InvalidInputError("sweep_distance must be > 0")
        if not self.wall_distance >= 0:
            raise InvalidInputError("wall_distance must be >= 0")
        if self.solver not in ("memetic", "exact"):
            raise InvalidInputError(f"unknown solver {self.solver!r}")


@dataclass
class CoveragePath:
    waypoints: list[Point]
    segment_tags: list[str]  # "sweep" or "transition", one per segment
    total_cost: float
    stats: dict
    timings: dict
    sequence: list[int] = field(default_factory=list)
    decomposition: Decomposition | None = None
    region: PolygonWithHoles | None = None
    graph: AdjacencyGraph | None = field(default=None, repr=False)

    def sweep_segments(self) -> list[tuple[Point, Point]]:
        w = self.waypoints
        return [(w[i], w[i + 1]) for i, t in enumerate(self.segment_tags) if t == "sweep"]

    def segments(self) -> list[tuple[Point, Point]]:
        w = self.waypoints
        return [(w[i], w[i + 1]) for i in range(len(w) - 1)]

    def to_dict(self, timings: bool = True) -> dict:
        d = {
            "total_cost": self.total_cost,
            "waypoints": [list(p) for p in self.waypoints],
            "segment_tags": self.segment_tags,
            "sequence": self.sequence,
            "stats": self.stats,
        }
        if self.decomposition is not None:
            d["cells"] = [[list(p) for p in c.ring.vertices] for c in self.decomposition.cells]
            d["scan_direction"] = self.decomposition.scan_direction
        if timings:
            d["timings"] = self.timings
        return d


@contextmanager
def _stage(name: str, timings: dict):
    t0 = time.perf_counter()
    try:
        yield
    except PlanningError as exc:
        if exc.stage is None:
            exc.stage = name
        raise
    finally:
        timings[name] = timings.get(name, 0.0) + time.perf_counter() - t0


def _endpoints(region: PolygonWithHoles, config: PlannerConfig) -> tuple[Point, Point]:
    start = config.start if config.start is not None else region.outer.vertices[0]
    goal = config.goal if config.goal is not None else start
    start = (float(start[0]), float(start[1]))
    goal = (float(goal[0]), float(goal[1]))
    inside = points_in_free_space(region, [start, goal])
    if not inside.all():
        bad = start if not inside[0] else goal
        raise InvalidInputError(f"start/goal {bad} is not inside the offset free space")
    return start, goal


def _solve(g: AdjacencyGraph, config: PlannerConfig) -> Solution:
    if config.solver == "exact":
        return solve_exact(g, state_budget=config.state_budget, time_limit=config.time_limit)
    return solve_memetic(g, seed=config.seed, time_limit=config.time_limit)


def _graph_from_patterns(region, cells, patterns, router, config, start, goal, timings, prune):
    with _stage("nodes", timings):
        nodes, clusters = make_nodes(
            cells, router, config.cost, config.sweep_distance, start, goal, patterns_per_cell=patterns
        )
    n_before = len(nodes)
    with _stage("pruning", timings):
        pruned = dominated_nodes(nodes, clusters, router) if prune else set()
        keep = [i for i in range(len(nodes)) if i not in pruned]
        dummy = AdjacencyGraph(nodes, clusters, np.zeros((len(nodes), len(nodes))))
        sub = _subgraph(dummy, keep)
    with _stage("edges", timings):
        cost, via = wire(sub.nodes, sub.clusters, router)
    return AdjacencyGraph(sub.nodes, sub.clusters, cost, via, router), n_before


def assemble(g: AdjacencyGraph, sol: Solution) -> tuple[list[Point], list[str]]:
    """Concatenate transitions and sweep patterns along a solution."""
    pts: list[Point] = [g.nodes[sol.sequence[0]].exit]
    tags: list[str] = []

    def push(q, tag):
        q = (float(q[0]), float(q[1]))
        if q == pts[-1]:
            return
        pts.append(q)
        tags.append(tag)

    for i, j in zip(sol.sequence[:-1], sol.sequence[1:]):
        for q in g.transition(i, j).waypoints[1:]:
            push(q, "transition")
        pat = g.nodes[j].pattern
        if pat is not None:
            w = pat.waypoints
            for k in range(1, len(w)):
                push(w[k], "sweep" if pat.sweep_mask[k - 1] else "transition")
    return pts, tags


def _finish(region, decomposition, g, sol, n_before, timings, vis_nodes) -> CoveragePath:
    pts, tags = assemble(g, sol)
    stats = {
        "cells": len(decomposition.cells),
        "nodes": sum(len(c) for c in g.cell_clusters),
        "nodes_before_pruning": n_before - 2,
        "edges": g.arc_count,
        "visibility_nodes": vis_nodes,
        "hole_vertices": region.hole_vertex_count,
        "solver": sol.solver,
    }
    timings = {name: timings.get(name, 0.0) for name in STAGES}
    return CoveragePath(pts, tags, sol.total_cost, stats, timings, sol.sequence, decomposition, region, g)


def plan(pwh: PolygonWithHoles, config: PlannerConfig) -> CoveragePath:
    """Offset, decompose along the best direction, enumerate sweep patterns,
    build and prune the E-GTSP graph, solve it and assemble the path."""
    timings: dict[str, float] = {}
    with _stage("cells", timings):
        region = offset_inward(pwh, config.wall_distance)
        start, goal = _endpoints(region, config)
        dec = best_decomposition(region, config.decomposition)
    with _stage("sweeps", timings):
        vis = build_visibility_graph(region)
        router = PathTable(vis, region, config.cost)
        patterns = []
        for c in dec.cells:
            dirs = None
            if config.min_coverage is not None:
                dirs = covering_directions(c, config.sweep_distance, config.min_coverage)
            patterns.append(all_patterns(c, router, config.sweep_distance, directions=dirs))
    g, n_before = _graph_from_patterns(region, dec.cells, patterns, router, config, start, goal, timings, config.prune)
    with _stage("solve", timings):
        sol = _solve(g, config)
    return _finish(region, dec, g, sol, n_before, timings, len(vis.nodes))


def plan_one_dir(pwh: PolygonWithHoles, config: PlannerConfig, all_directions: bool = False) -> CoveragePath:
    """Classic baseline: one fixed sweep pattern per cell, swept perpendicular
    to the scan direction, bottom-up and counter-clockwise.

    By default the cells are those of :func:`plan` (smallest altitude sum), so
    every baseline node is also a node of the full problem. With
    ``all_directions`` every edge direction is decomposed and the cheapest
    resulting path is returned instead.
    """
    timings: dict[str, float] = {}
    with _stage("cells", timings):
        region = offset_inward(pwh, config.wall_distance)
        start, goal = _endpoints(region, config)
        if all_directions:
            decs = []
            for theta in edge_directions(region):
                cells = decompose(region, theta, config.decomposition)
                decs.append(Decomposition(tuple(cells), theta, config.decomposition, altitude_sum(cells)))
        else:
            decs = [best_decomposition(region, config.decomposition)]
    with _stage("sweeps", timings):
        vis = build_visibility_graph(region)
        router = PathTable(vis, region, config.cost)
    best = None
    for dec in decs:
        with _stage("sweeps", timings):
            sweep_dir = (dec.scan_direction + math.pi / 2) % math.pi
            patterns = [permutations(c, sweep_dir, router, config.sweep_distance)[:1] for c in dec.cells]
        g, n_before = _graph_from_patterns(region, dec.cells, patterns, router, config, start, goal, timings, False)
        with _stage("solve", timings):
            sol = _solve(g, config)
        if best is None or sol.total_cost < best[0].total_cost - 1e-9 * max(1.0, sol.total_cost):
            best = (sol, g, dec, n_before)
    sol, g, dec, n_before = best
    return _finish(region, dec, g, sol, n_before, timings, len(vis.nodes))
