"""Exact and memetic solvers for the start-to-goal E-GTSP path."""
from __future__ import annotations

import heapq
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import IntractableError, SolverTimeout
from .gtsp import ABSENT_ARC, AdjacencyGraph

DEFAULT_STATE_BUDGET = 2**20


@dataclass
class Solution:
    sequence: list[int]
    total_cost: float
    solver: str
    wall_time: float
    history: list[float] = field(default_factory=list)  # best cost per generation


def _finite_cost(g: AdjacencyGraph) -> np.ndarray:
    return np.where(np.isfinite(g.cost), g.cost, ABSENT_ARC)


def solve_exact(g: AdjacencyGraph, state_budget: int = DEFAULT_STATE_BUDGET, time_limit: float | None = None) -> Solution:
    """Dijkstra over (node, set of visited clusters) product states."""
    t0 = time.perf_counter()
    clusters = g.cell_clusters
    m = len(clusters)
    ids = np.array([i for c in clusters for i in c], dtype=np.int64)
    bits = np.array([1 << k for k, c in enumerate(clusters) for _ in c], dtype=np.int64)
    states = len(ids) * (1 << m)
    if states > state_budget:
        raise IntractableError(
            f"exact solver needs {len(ids)} x 2^{m} = {states} states (budget {state_budget})"
        )
    s, goal = g.start, g.goal
    C = _finite_cost(g)
    if m == 0:
        return Solution([s, goal], float(g.cost[s, goal]), "exact", time.perf_counter() - t0)
    full = (1 << m) - 1
    dist = np.full((len(ids), 1 << m), np.inf)
    parent = np.full((len(ids), 1 << m), -1, dtype=np.int64)
    heap: list[tuple[float, int, int]] = []
    for k, n in enumerate(ids):
        d = C[s, n]
        dist[k, bits[k]] = d
        heap.append((d, k, int(bits[k])))
    heapq.heapify(heap)
    best_final = (np.inf, -1)
    pops = 0
    while heap:
        d, k, mask = heapq.heappop(heap)
        if k < 0:
            best_final = (d, -k - 1)
            break
        if d > dist[k, mask]:
            continue
        pops += 1
        if time_limit is not None and pops % 4096 == 0 and time.perf_counter() - t0 > time_limit:
            raise SolverTimeout(f"exact solver timed out after {time_limit} s")
        node = ids[k]
        if mask == full:
            heapq.heappush(heap, (d + C[node, goal], -k - 1, mask))
            continue
        sel = np.nonzero((bits & mask) == 0)[0]
        nd = d + C[node, ids[sel]]
        nm = mask | bits[sel]
        better = nd < dist[sel, nm]
        for kk, dd, mm in zip(sel[better].tolist(), nd[better].tolist(), nm[better].tolist()):
            dist[kk, mm] = dd
            parent[kk, mm] = k
            heapq.heappush(heap, (dd, kk, mm))
    total, k = best_final
    seq = []
    mask = full
    while k >= 0:
        seq.append(int(ids[k]))
        pk = parent[k, mask]
        mask ^= int(bits[k])
        k = int(pk)
    seq = [s, *reversed(seq), goal]
    return Solution(seq, float(total), "exact", time.perf_counter() - t0)


class _Evaluator:
    """Path costs for cluster orders and fixed node sequences."""

    def __init__(self, g: AdjacencyGraph):
        self.C = _finite_cost(g)
        self.s, self.g = g.start, g.goal
        self.clusters = [np.array(c, dtype=np.int64) for c in g.cell_clusters]
        self.blocks = {}
        self.singletons = all(len(c) == 1 for c in self.clusters)
        self._dense = None

    def dense(self):
        """Cluster-to-cluster cost blocks padded to the largest cluster with inf,
        plus the start and goal rows."""
        if self._dense is None:
            n, m = len(self.C), len(self.clusters)
            K = max(len(c) for c in self.clusters)
            padded = np.full((n + 1, n + 1), np.inf)
            padded[:n, :n] = self.C
            N = np.full((m, K), n)
            for c, members in enumerate(self.clusters):
                N[c, : len(members)] = members
            D = padded[N[:, None, :, None], N[None, :, None, :]]
            self._dense = (D, padded[self.s, N], padded[N, self.g])
        return self._dense

    def _block(self, a: int, b: int) -> np.ndarray:
        key = (a, b)
        blk = self.blocks.get(key)
        if blk is None:
            blk = self.C[np.ix_(self.clusters[a], self.clusters[b])]
            self.blocks[key] = blk
        return blk

    def optimize(self, order) -> tuple[float, list[int]]:
        """Best node per cluster for a fixed cluster order (layered DP)."""
        if self.singletons:
            seq = [int(self.clusters[c][0]) for c in order]
            return self.cost(seq), seq
        first = self.clusters[order[0]]
        val = self.C[self.s, first]
        back = []
        for a, b in zip(order[:-1], order[1:]):
            M = val[:, None] + self._block(a, b)
            arg = np.argmin(M, axis=0)
            val = M[arg, np.arange(M.shape[1])]
            back.append(arg)
        final = val + self.C[self.clusters[order[-1]], self.g]
        k = int(np.argmin(final))
        total = float(final[k])
        picks = [k]
        for arg in reversed(back):
            k = int(arg[k])
            picks.append(k)
        picks.reverse()
        seq = [int(self.clusters[c][p]) for c, p in zip(order, picks)]
        return total, seq

    def path(self, seq) -> list[int]:
        return [self.s, *seq, self.g]

    def cost(self, seq) -> float:
        p = self.path(seq)
        return float(self.C[p[:-1], p[1:]].sum())


def _two_opt(ev: _Evaluator, seq: list[int]) -> tuple[list[int], bool]:
    """Best-improvement segment reversal with fixed nodes."""
    P = np.array(ev.path(seq))
    C = ev.C
    n = len(P)
    fwd = np.concatenate([[0.0], np.cumsum(C[P[:-1], P[1:]])])
    back = C[P[1:], P[:-1]]
    back[0] = back[-1] = 0.0  # into start / out of goal: never part of a reversal
    bwd = np.concatenate([[0.0], np.cumsum(back)])
    a = np.arange(1, n - 2)[:, None]
    b = np.arange(2, n - 1)[None, :]
    valid = b > a
    a_b = np.broadcast_to(a, valid.shape)
    b_b = np.broadcast_to(b, valid.shape)
    delta = (
        C[P[a_b - 1], P[b_b]]
        + C[P[a_b], P[b_b + 1]]
        + (bwd[b_b] - bwd[a_b])
        - C[P[a_b - 1], P[a_b]]
        - C[P[b_b], P[b_b + 1]]
        - (fwd[b_b] - fwd[a_b])
    )
    delta = np.where(valid, delta, np.inf)
    if delta.size == 0:
        return seq, False
    k = int(np.argmin(delta))
    if delta.flat[k] >= -1e-9:
        return seq, False
    i, j = int(a_b.flat[k]), int(b_b.flat[k])
    P = P.tolist()
    P[i : j + 1] = P[i : j + 1][::-1]
    return P[1:-1], True


def _or_opt(ev: _Evaluator, seq: list[int], max_len: int = 3) -> tuple[list[int], bool]:
    """Best-improvement move of a segment of 1..3 clusters elsewhere."""
    C = ev.C
    P = np.array(ev.path(seq))
    n = len(P)
    arc = C[P[:-1], P[1:]]  # arc k joins P[k] -> P[k+1]
    best = (-1e-9, None)
    k = np.arange(n - 1)[None, :]
    for L in range(1, max_len + 1):
        i = np.arange(1, n - L)[:, None]  # segment P[i..i+L-1], ends before the goal
        if i.size == 0:
            break
        j = i + L - 1
        removed = C[P[i - 1], P[i]] + C[P[j], P[j + 1]] - C[P[i - 1], P[j + 1]]
        added = C[P[k], P[i]] + C[P[j], P[k + 1]] - arc[k]
        delta = added - removed
        delta = np.where((k >= i - 1) & (k <= j), np.inf, delta)
        flat = int(np.argmin(delta))
        if delta.flat[flat] < best[0]:
            best = (float(delta.flat[flat]), (int(i.flat[flat // delta.shape[1]]), L, flat % delta.shape[1]))
    if best[1] is None:
        return seq, False
    i, L, kk = best[1]
    P = P.tolist()
    seg = P[i : i + L]
    rest = P[:i] + P[i + L :]
    pos = kk + 1 if kk < i else kk + 1 - L
    newp = rest[:pos] + seg + rest[pos:]
    return newp[1:-1], True


def _reinsert(ev: _Evaluator, order: list[int], current: float) -> list[int] | None:
    """Best move of one cluster to another position, scored with optimal
    node choice for the whole tour.

    Works on padded (cluster, cluster, node, node) cost blocks. Forward and
    backward layered-DP values of the current order are shared; the values of
    the order with one cluster removed are propagated for every removed
    cluster at once, then every (cluster, position) insertion is scored.
    """
    m = len(order)
    if m < 2:
        return None
    D, S, G = ev.dense()
    K = S.shape[1]
    inf = np.inf
    O = np.asarray(order)
    adj = D[O[:-1], O[1:]]
    F = np.empty((m, K))
    F[0] = S[O[0]]
    for p in range(1, m):
        F[p] = (F[p - 1][:, None] + adj[p - 1]).min(axis=0)
    B = np.empty((m, K))
    B[-1] = G[O[-1]]
    for p in range(m - 2, -1, -1):
        B[p] = (adj[p] + B[p + 1][None, :]).min(axis=1)
    # without cluster i: Fr[t, i] is the forward value at position i + t,
    # Br[t, i] the backward value at position i - 1 - t
    Fr = np.full((m, m, K), inf)
    Br = np.full((m, m, K), inf)
    Fr[0, 0] = S[O[1]]
    Br[0, m - 1] = G[O[m - 2]]
    if m > 2:
        mid = np.arange(1, m - 1)
        skip = D[O[mid - 1], O[mid + 1]]
        Fr[0, mid] = (F[mid - 1][:, :, None] + skip).min(axis=1)
        Br[0, mid] = (skip + B[mid + 1][:, None, :]).min(axis=2)
    for t in range(m - 2):
        ii = np.arange(0, m - 2 - t)
        Fr[t + 1, ii] = (Fr[t, ii][:, :, None] + adj[ii + t + 1]).min(axis=1)
        ii = np.arange(t + 2, m)
        Br[t + 1, ii] = (adj[ii - 2 - t] + Br[t, ii][:, None, :]).min(axis=2)
    I, Q = np.nonzero(~np.eye(m, dtype=bool))  # insert cluster I before rest[Q]
    x = O[I]
    after = Q > I
    prev_c = np.where(after, O[np.minimum(Q, m - 1)], O[np.maximum(Q - 1, 0)])
    f = np.where(after[:, None], Fr[np.maximum(Q - 1 - I, 0), I], F[np.maximum(Q - 1, 0)])
    into = (f[:, :, None] + D[prev_c, x]).min(axis=1)
    into[Q == 0] = S[x[Q == 0]]
    last = Q == m - 1
    next_c = np.where(after, O[np.minimum(Q + 1, m - 1)], O[Q])
    b = np.where(after[:, None], B[np.minimum(Q + 1, m - 1)], Br[np.maximum(I - 1 - Q, 0), I])
    out = (D[x, next_c] + b[:, None, :]).min(axis=2)
    out[last] = G[x[last]]
    total = (into + out).min(axis=1)
    k = int(np.argmin(total))
    if not total[k] < current - 1e-9:
        return None
    i, q = int(I[k]), int(Q[k])
    rest = order[:i] + order[i + 1:]
    return rest[:q] + [order[i]] + rest[q:]


def _local_search(ev: _Evaluator, order: list[int], cluster_of: dict, deadline: float = math.inf) -> tuple[float, list[int]]:
    _, seq = ev.optimize(order)
    while True:
        if time.perf_counter() > deadline:
            return ev.cost(seq), seq
        changed = False
        moved = True
        while moved:
            seq, moved = _two_opt(ev, seq)
            changed |= moved
        seq, moved = _or_opt(ev, seq)
        changed |= moved
        order = [cluster_of[nid] for nid in seq]
        new_cost, new_seq = ev.optimize(order)
        if new_cost < ev.cost(seq) - 1e-9:
            seq = new_seq
            changed = True
        if not changed:
            better = _reinsert(ev, order, ev.cost(seq))
            if better is not None:
                _, seq = ev.optimize(better)
                changed = True
        if not changed:
            return ev.cost(seq), seq


def _order_crossover(rng: np.random.Generator, p1: list[int], p2: list[int]) -> list[int]:
    m = len(p1)
    a, b = sorted(rng.choice(m + 1, size=2, replace=False).tolist())
    middle = p1[a:b]
    taken = set(middle)
    rest = [c for c in p2 if c not in taken]
    return rest[:a] + middle + rest[a:]


def _double_bridge(rng: np.random.Generator, order: list[int]) -> list[int]:
    """Swap two adjacent blocks of the order, keeping their internal direction."""
    a, b, c = sorted(rng.choice(np.arange(1, len(order)), size=3, replace=False).tolist())
    return order[:a] + order[b:c] + order[a:b] + order[c:]


def solve_memetic(
    g: AdjacencyGraph,
    seed: int = 0,
    generations: int = 200,
    time_limit: float | None = 60.0,
    population: int = 10,
    offspring: int = 10,
    stagnation: int = 25,
    mutation_rate: float = 0.2,
) -> Solution:
    """Population of cluster orders, each scored after optimal node choice.

    Offspring come from order crossover plus an occasional double-bridge
    mutation, and one random immigrant joins every generation. Each is
    improved by 2-opt, or-opt, single-cluster reinsertion and cluster
    optimization.
    Survivors are the best distinct individuals (elitist). Stops after
    ``stagnation`` generations without improvement, ``generations`` in total,
    or ``time_limit`` seconds. The limit also interrupts local search and
    population setup, returning the best tour found so far. Results are
    reproducible for a fixed seed unless the time limit cuts the run short.
    """
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    ev = _Evaluator(g)
    m = len(ev.clusters)
    if m == 0:
        return Solution([g.start, g.goal], float(g.cost[g.start, g.goal]), "memetic", time.perf_counter() - t0)
    cluster_of = {nid: c for c, members in enumerate(ev.clusters) for nid in members.tolist()}

    deadline = math.inf if time_limit is None else t0 + time_limit

    def individual(order):
        cost, seq = _local_search(ev, order, cluster_of, deadline)
        return cost, tuple(seq)

    def expired():
        return time.perf_counter() > deadline

    pool: dict[tuple, float] = {}
    for _ in range(population):
        if pool and expired():
            break
        cost, seq = individual(rng.permutation(m).tolist())
        pool[seq] = cost
    pop = sorted(pool.items(), key=lambda kv: (kv[1], kv[0]))[:population]
    history = [pop[0][1]]
    idle = 0
    for _gen in range(generations):
        if expired():
            break
        children = {}
        # one random immigrant per generation keeps the population diverse
        cost, seq = individual(rng.permutation(m).tolist())
        children[seq] = cost
        for _ in range(offspring - 1):
            if expired():
                break
            i, j = rng.choice(len(pop), size=2, replace=len(pop) < 2).tolist()
            o1 = [cluster_of[n] for n in pop[i][0]]
            o2 = [cluster_of[n] for n in pop[j][0]]
            child = _order_crossover(rng, o1, o2) if m > 1 else o1
            if rng.random() < mutation_rate and m > 3:
                child = _double_bridge(rng, child)
            cost, seq = individual(child)
            children[seq] = cost
        merged = dict(pop)
        merged.update(children)
        pop = sorted(merged.items(), key=lambda kv: (kv[1], kv[0]))[:population]
        if pop[0][1] < history[-1] - 1e-9:
            idle = 0
        else:
            idle += 1
        history.append(pop[0][1])
        if idle >= stagnation:
            break
    best_seq, best_cost = pop[0]
    seq = [g.start, *best_seq, g.goal]
    return Solution(seq, float(best_cost), "memetic", time.perf_counter() - t0, history)
