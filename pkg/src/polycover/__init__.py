"""Coverage path planning for polygons with holes.

A region is split into monotone cells, every cell gets a set of candidate
boustrophedon sweep patterns, and the cheapest tour through one pattern per
cell is found by solving a generalized TSP.
"""
from .cost import CostKind, CostModel, segment_time
from .decomposition import Cell, Decomposition, DecompositionKind, best_decomposition, decompose
from .errors import GeometryError, IntractableError, InvalidInputError, NoPathError, PlanningError, SolverTimeout
from .geometry import Polyline, PolygonWithHoles, Ring, offset_inward
from .planner import CoveragePath, PlannerConfig, plan, plan_one_dir

__version__ = "0.1.0"

__all__ = [
    "Cell",
    "CostKind",
    "CostModel",
    "CoveragePath",
    "Decomposition",
    "DecompositionKind",
    "GeometryError",
    "IntractableError",
    "InvalidInputError",
    "NoPathError",
    "PlannerConfig",
    "PlanningError",
    "Polyline",
    "PolygonWithHoles",
    "Ring",
    "SolverTimeout",
    "best_decomposition",
    "decompose",
    "offset_inward",
    "plan",
    "plan_one_dir",
    "segment_time",
]
