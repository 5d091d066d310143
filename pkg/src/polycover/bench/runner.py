"""Benchmark harness: every (map, planner configuration) pair becomes one CSV row."""
from __future__ import annotations

import csv
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields

from ..decomposition import DecompositionKind
from ..errors import GeometryError, IntractableError, InvalidInputError, SolverTimeout
from ..planner import STAGES, PlannerConfig, plan, plan_one_dir
from .mapfile import MapFile

log = logging.getLogger(__name__)

CSV_VERSION = 1
CSV_BANNER = f"# polycover benchmark v{CSV_VERSION}"
CONFIGS = ("our_bcd", "our_tcd", "one_dir", "exact")
DEFAULT_SWEEP = 4.0
DEFAULT_WALL = 0.5


@dataclass
class BenchmarkRecord:
    map_id: str
    config: str
    status: str  # ok, intractable, timeout, geometry, invalid, error
    hole_vertices: int
    cells: int | None = None
    nodes: int | None = None
    edges: int | None = None
    t_cells: float | None = None
    t_sweeps: float | None = None
    t_nodes: float | None = None
    t_pruning: float | None = None
    t_edges: float | None = None
    t_solve: float | None = None
    t_total: float | None = None
    path_cost: float | None = None
    stage: str = ""
    message: str = ""


COLUMNS = tuple(f.name for f in fields(BenchmarkRecord))
TIMING_COLUMNS = tuple(c for c in COLUMNS if c.startswith("t_"))


def planner_config(name: str, budget_s: float, sweep_distance: float, wall_distance: float,
                   seed: int = 0, defaults: dict | None = None) -> tuple:
    """(planner function, PlannerConfig) for a named benchmark configuration."""
    if name not in CONFIGS:
        raise InvalidInputError(f"unknown configuration {name!r}; choose from {', '.join(CONFIGS)}")
    d = defaults or {}
    common = dict(
        sweep_distance=float(d.get("sweep_distance", sweep_distance)),
        wall_distance=float(d.get("wall_distance", wall_distance)),
        start=tuple(d["start"]) if "start" in d else None,
        goal=tuple(d["goal"]) if "goal" in d else None,
        seed=seed,
        # the budget caps the exact solver; the memetic solver keeps its own 60 s limit
        time_limit=min(budget_s, 60.0),
    )
    if name == "our_bcd":
        return plan, PlannerConfig(decomposition=DecompositionKind.BCD, **common)
    if name == "our_tcd":
        return plan, PlannerConfig(decomposition=DecompositionKind.TCD, **common)
    if name == "one_dir":
        return plan_one_dir, PlannerConfig(decomposition=DecompositionKind.BCD, **common)
    common["time_limit"] = budget_s
    return plan, PlannerConfig(decomposition=DecompositionKind.BCD, solver="exact", **common)


def run_pair(map_file: MapFile, name: str, budget_s: float = 200.0, sweep_distance: float = DEFAULT_SWEEP,
             wall_distance: float = DEFAULT_WALL, seed: int = 0) -> BenchmarkRecord:
    """Plan one map with one configuration; failures become tagged records."""
    rec = BenchmarkRecord(map_file.id, name, "ok", map_file.hole_vertex_count)
    t0 = time.perf_counter()
    try:
        fn, config = planner_config(name, budget_s, sweep_distance, wall_distance, seed, map_file.defaults)
        result = fn(map_file.polygon(), config)
    except SolverTimeout as exc:
        rec.status, rec.stage, rec.message = "timeout", exc.stage or "", str(exc)
    except IntractableError as exc:
        rec.status, rec.stage, rec.message = "intractable", exc.stage or "", str(exc)
    except InvalidInputError as exc:
        rec.status, rec.stage, rec.message = "invalid", exc.stage or "", str(exc)
    except GeometryError as exc:
        rec.status, rec.stage, rec.message = "geometry", exc.stage or "", str(exc)
    except Exception as exc:  # never abort the sweep
        log.exception("unexpected failure on %s/%s", map_file.id, name)
        rec.status, rec.message = "error", f"{type(exc).__name__}: {exc}"
    else:
        rec.cells = result.stats["cells"]
        rec.nodes = result.stats["nodes"]
        rec.edges = result.stats["edges"]
        for stage in STAGES:
            setattr(rec, f"t_{stage}", result.timings[stage])
        rec.path_cost = result.total_cost
    rec.t_total = time.perf_counter() - t0
    return rec


def _run_star(args):
    return run_pair(*args)


class CsvWriter:
    """Append-and-flush CSV writer with a versioned banner line."""

    def __init__(self, path):
        self._fh = open(path, "w", newline="")
        self._fh.write(CSV_BANNER + "\n")
        self._w = csv.DictWriter(self._fh, fieldnames=COLUMNS)
        self._w.writeheader()
        self._fh.flush()

    def write(self, rec: BenchmarkRecord) -> None:
        row = {k: ("" if v is None else (repr(v) if isinstance(v, float) else v)) for k, v in asdict(rec).items()}
        self._w.writerow(row)
        self._fh.flush()

    def close(self) -> None:
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def read_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    return list(csv.DictReader(lines))


def run_benchmark(maps, configs=CONFIGS, budget_s: float = 200.0, jobs: int = 1, csv_path=None,
                  sweep_distance: float = DEFAULT_SWEEP, wall_distance: float = DEFAULT_WALL,
                  seed: int = 0, progress=None) -> list[BenchmarkRecord]:
    """Run every configuration on every map.

    Rows are produced in (map, config) order regardless of ``jobs`` and are
    written to ``csv_path`` as soon as they are available.
    """
    configs = list(configs)
    for name in configs:
        if name not in CONFIGS:
            raise InvalidInputError(f"unknown configuration {name!r}; choose from {', '.join(CONFIGS)}")
    tasks = [(m, c, budget_s, sweep_distance, wall_distance, seed) for m in maps for c in configs]
    writer = CsvWriter(csv_path) if csv_path is not None else None
    records = []
    try:
        if jobs > 1:
            pool = ProcessPoolExecutor(max_workers=jobs)
            stream = pool.map(_run_star, tasks)
        else:
            pool = None
            stream = map(_run_star, tasks)
        for rec in stream:
            records.append(rec)
            if writer is not None:
                writer.write(rec)
            if progress is not None:
                progress(rec)
        if pool is not None:
            pool.shutdown()
    finally:
        if writer is not None:
            writer.close()
    return records
