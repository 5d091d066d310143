"""Random obstacle worlds."""
from __future__ import annotations

import math

import numpy as np
from shapely.geometry import Polygon, box

from ..errors import InvalidInputError
from .mapfile import MapFile

WORLD = 100.0
MIN_EXTENT, MAX_EXTENT = 2.0, 15.0
CLEARANCE = 3.0
MAX_ATTEMPTS = 10_000


class PlacementError(RuntimeError):
    pass


def _round(v: float) -> float:
    return round(float(v), 6)


def random_convex(rng: np.random.Generator, n_vertices: int) -> list[tuple[float, float]]:
    """Convex polygon with ``n_vertices`` corners on a rotated ellipse,
    bounding box scaled into the allowed extent range, centred at the origin."""
    gap = 2 * math.pi / n_vertices
    # jittered angles keep every corner strictly convex and edges non-degenerate
    ang = gap * np.arange(n_vertices) + rng.uniform(-0.3, 0.3, n_vertices) * gap + rng.uniform(0, 2 * math.pi)
    rot = rng.uniform(0, math.pi)
    pts = np.column_stack([np.cos(ang), rng.uniform(0.3, 1.0) * np.sin(ang)])
    c, s = math.cos(rot), math.sin(rot)
    pts = pts @ np.array([[c, s], [-s, c]])
    pts -= pts.mean(axis=0)
    span = pts.max(axis=0) - pts.min(axis=0)
    target = rng.uniform(MIN_EXTENT, MAX_EXTENT, 2)
    pts *= target / span
    return [(_round(x), _round(y)) for x, y in pts]


def generate_map(rng: np.random.Generator, obstacles: int, map_id: str = "") -> MapFile:
    if not 0 <= obstacles <= 15:
        raise InvalidInputError("obstacles must be within 0..15")
    world = box(0, 0, WORLD, WORLD)
    inner = world.buffer(-CLEARANCE, join_style="mitre")
    holes: list[list[tuple[float, float]]] = []
    shapes: list[Polygon] = []
    attempts = 0
    while len(holes) < obstacles:
        attempts += 1
        if attempts > MAX_ATTEMPTS:
            raise PlacementError(f"could not place {obstacles} obstacles in {MAX_ATTEMPTS} attempts")
        shape = random_convex(rng, int(rng.integers(4, 9)))
        x, y = rng.uniform(0, WORLD, 2)
        pts = [(_round(px + x), _round(py + y)) for px, py in shape]
        poly = Polygon(pts)
        if not poly.is_valid or len(poly.exterior.coords) - 1 != len(pts):
            continue
        if not inner.contains(poly):
            continue
        if any(poly.distance(o) < CLEARANCE for o in shapes):
            continue
        shapes.append(poly)
        holes.append(pts)
    outer = [(0.0, 0.0), (WORLD, 0.0), (WORLD, WORLD), (0.0, WORLD)]
    return MapFile(outer, holes, {}, map_id)


def generate_maps(count: int, obstacles, seed: int = 0) -> list[MapFile]:
    """``count`` maps; ``obstacles`` is a fixed number or an inclusive (lo, hi)
    range sampled per map. Map k depends only on (seed, k)."""
    if count <= 0:
        raise InvalidInputError("count must be > 0")
    lo, hi = (obstacles, obstacles) if np.isscalar(obstacles) else obstacles
    out = []
    for k in range(count):
        rng = np.random.default_rng([seed, k])
        n = int(rng.integers(lo, hi + 1))
        out.append(generate_map(rng, n, f"map_{seed}_{k:04d}"))
    return out
