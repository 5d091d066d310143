"""Command line interface: ``polycover {plan,gen-maps,bench,render}``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .cost import CostModel
from .errors import IntractableError, InvalidInputError, PlanningError
from .planner import PlannerConfig, plan

EXIT_OK, EXIT_INVALID, EXIT_INTRACTABLE, EXIT_GEOMETRY = 0, 2, 3, 4

log = logging.getLogger("polycover")


def _point(text: str) -> tuple[float, float]:
    try:
        x, y = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected X,Y, got {text!r}") from None
    return x, y


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="polycover", description="Coverage path planning for polygons with holes.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    pl = sub.add_parser("plan", help="plan a coverage path for one map")
    pl.add_argument("--map", required=True, type=Path)
    pl.add_argument("--sweep-distance", type=float, help="m (default: map value or 4)")
    pl.add_argument("--wall-distance", type=float, help="m (default: map value or 0)")
    pl.add_argument("--decomposition", choices=("bcd", "tcd"), default="bcd")
    pl.add_argument("--cost", choices=("time", "distance", "waypoints"), default="time")
    pl.add_argument("--v-max", type=float, default=3.0, help="m/s")
    pl.add_argument("--a-max", type=float, default=0.5, help="m/s^2")
    pl.add_argument("--solver", choices=("memetic", "exact"), default="memetic")
    pl.add_argument("--seed", type=int, default=0)
    pl.add_argument("--time-limit", type=float, default=60.0, help="solver wall-clock limit in s")
    pl.add_argument("--start", type=_point, help="X,Y")
    pl.add_argument("--goal", type=_point, help="X,Y (default: start)")
    pl.add_argument("--out", type=Path, help="write the plan as JSON (default: stdout)")
    pl.add_argument("--svg", type=Path)
    pl.add_argument("--no-timings", action="store_true", help="omit stage timings from the JSON")

    g = sub.add_parser("gen-maps", help="generate random obstacle maps")
    g.add_argument("--count", type=int, required=True)
    g.add_argument("--obstacles", default="0-15", help="N or LO-HI (default 0-15)")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out-dir", type=Path, required=True)

    b = sub.add_parser("bench", help="run planner configurations over a directory of maps")
    b.add_argument("--maps-dir", type=Path, required=True)
    b.add_argument("--configs", default="our_bcd,our_tcd,one_dir,exact")
    b.add_argument("--budget-s", type=float, default=200.0, help="exact solver budget")
    b.add_argument("--jobs", type=int, default=1)
    b.add_argument("--csv", type=Path, required=True)
    b.add_argument("--sweep-distance", type=float, default=4.0)
    b.add_argument("--wall-distance", type=float, default=0.5)
    b.add_argument("--seed", type=int, default=0)

    r = sub.add_parser("render", help="render a map and optionally a plan as SVG")
    r.add_argument("--map", required=True, type=Path)
    r.add_argument("--plan", type=Path, help="plan JSON written by 'plan'")
    r.add_argument("--svg", required=True, type=Path)
    return p


def _obstacle_range(text: str) -> tuple[int, int]:
    try:
        lo, _, hi = text.partition("-")
        lo = int(lo)
        hi = int(hi) if hi else lo
    except ValueError:
        raise InvalidInputError(f"--obstacles expects N or LO-HI, got {text!r}") from None
    if not 0 <= lo <= hi <= 15:
        raise InvalidInputError("--obstacles must lie within 0..15")
    return lo, hi


def cmd_plan(args) -> int:
    from .bench.mapfile import load_map
    from .bench.render import render_svg

    m = load_map(args.map)
    d = m.defaults
    start = args.start or (tuple(d["start"]) if "start" in d else None)
    goal = args.goal or (tuple(d["goal"]) if "goal" in d else None)
    config = PlannerConfig(
        decomposition=args.decomposition,
        cost=CostModel(args.cost, args.v_max, args.a_max),
        sweep_distance=args.sweep_distance if args.sweep_distance is not None else float(d.get("sweep_distance", 4.0)),
        wall_distance=args.wall_distance if args.wall_distance is not None else float(d.get("wall_distance", 0.0)),
        solver=args.solver,
        seed=args.seed,
        start=start,
        goal=goal,
        time_limit=args.time_limit,
    )
    result = plan(m.polygon(), config)
    doc = {"map": m.id, **result.to_dict(timings=not args.no_timings)}
    text = json.dumps(doc, indent=1) + "\n"
    if args.out:
        args.out.write_text(text)
    else:
        sys.stdout.write(text)
    if args.svg:
        args.svg.write_text(render_svg(m, result.decomposition, result))
    log.info("cost %.3f, %d cells, %d nodes", result.total_cost, result.stats["cells"], result.stats["nodes"])
    return EXIT_OK


def cmd_gen_maps(args) -> int:
    from .bench.generate import generate_maps
    from .bench.mapfile import save_map

    maps = generate_maps(args.count, _obstacle_range(args.obstacles), args.seed)
    args.out_dir.mkdir(parents=True, exist_ok=True)
    for m in maps:
        save_map(m, args.out_dir / f"{m.id}.json")
    log.info("wrote %d maps to %s", len(maps), args.out_dir)
    return EXIT_OK


def cmd_bench(args) -> int:
    from .bench.mapfile import load_map
    from .bench.runner import run_benchmark

    files = sorted(args.maps_dir.glob("*.json"))
    if not files:
        raise InvalidInputError(f"no *.json maps in {args.maps_dir}")
    if args.jobs < 1:
        raise InvalidInputError("--jobs must be >= 1")
    maps = [load_map(f) for f in files]
    configs = [c.strip() for c in args.configs.split(",") if c.strip()]

    def progress(rec):
        log.info("%s %s %s %s", rec.map_id, rec.config, rec.status, rec.path_cost)

    run_benchmark(maps, configs, args.budget_s, args.jobs, args.csv, args.sweep_distance,
                  args.wall_distance, args.seed, progress)
    return EXIT_OK


def cmd_render(args) -> int:
    from .bench.mapfile import load_map
    from .bench.render import render_svg

    m = load_map(args.map)
    doc = json.loads(args.plan.read_text()) if args.plan else None
    cells = doc.get("cells") if doc else None
    args.svg.write_text(render_svg(m, cells, doc))
    return EXIT_OK


COMMANDS = {"plan": cmd_plan, "gen-maps": cmd_gen_maps, "bench": cmd_bench, "render": cmd_render}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except PlanningError as exc:
        if isinstance(exc, InvalidInputError):
            code = EXIT_INVALID
        elif isinstance(exc, IntractableError):
            code = EXIT_INTRACTABLE
        else:
            code = EXIT_GEOMETRY
        stage = f"[{exc.stage}] " if exc.stage else ""
        print(f"polycover: {stage}{exc}", file=sys.stderr)
        return code
    except (OSError, json.JSONDecodeError) as exc:
        print(f"polycover: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
