"""JSON map documents."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import InvalidInputError
from ..geometry import PolygonWithHoles

FORMAT = "polycover-map"
VERSION = 1
DEFAULT_KEYS = ("sweep_distance", "wall_distance", "start", "goal")


@dataclass
class MapFile:
    outer: list[tuple[float, float]]
    holes: list[list[tuple[float, float]]] = field(default_factory=list)
    defaults: dict = field(default_factory=dict)
    id: str = ""
    units: str = "m"

    def polygon(self, validate: bool = True) -> PolygonWithHoles:
        return PolygonWithHoles.from_coords(self.outer, self.holes, validate=validate)

    @property
    def hole_vertex_count(self) -> int:
        return sum(len(h) for h in self.holes)

    def to_dict(self) -> dict:
        return {
            "format": FORMAT,
            "version": VERSION,
            "id": self.id,
            "units": self.units,
            "outer": [[float(x), float(y)] for x, y in self.outer],
            "holes": [[[float(x), float(y)] for x, y in h] for h in self.holes],
            "defaults": {k: self.defaults[k] for k in DEFAULT_KEYS if k in self.defaults},
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=1) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "MapFile":
        if d.get("format", FORMAT) != FORMAT:
            raise InvalidInputError(f"not a map document: format={d.get('format')!r}")
        if d.get("units", "m") != "m":
            raise InvalidInputError(f"unsupported units {d.get('units')!r}")
        try:
            outer = [(float(x), float(y)) for x, y in d["outer"]]
            holes = [[(float(x), float(y)) for x, y in h] for h in d.get("holes", [])]
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidInputError(f"malformed map coordinates: {exc}") from exc
        defaults = dict(d.get("defaults") or {})
        unknown = set(defaults) - set(DEFAULT_KEYS)
        if unknown:
            raise InvalidInputError(f"unknown map defaults {sorted(unknown)}")
        for key in ("start", "goal"):
            if key in defaults:
                defaults[key] = [float(v) for v in defaults[key]]
        return cls(outer, holes, defaults, str(d.get("id", "")), "m")

    @classmethod
    def loads(cls, text: str) -> "MapFile":
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InvalidInputError(f"map is not valid JSON: {exc}") from exc
        return cls.from_dict(d)


def load_map(path) -> MapFile:
    m = MapFile.loads(Path(path).read_text())
    if not m.id:
        m.id = Path(path).stem
    return m


def save_map(m: MapFile, path) -> None:
    Path(path).write_text(m.dumps())
