"""Deterministic SVG rendering of maps, cells and coverage paths."""
from __future__ import annotations

from xml.sax.saxutils import quoteattr

SIZE = 1000.0
MARGIN = 20.0


def _fmt(v: float) -> str:
    return f"{v:.3f}".rstrip("0").rstrip(".")


class _Frame:
    def __init__(self, outer):
        xs = [p[0] for p in outer]
        ys = [p[1] for p in outer]
        self.x0, self.y1 = min(xs), max(ys)
        span = max(max(xs) - self.x0, self.y1 - min(ys), 1e-9)
        self.k = (SIZE - 2 * MARGIN) / span

    def pt(self, p) -> str:
        # y grows downwards in SVG
        return f"{_fmt(MARGIN + (p[0] - self.x0) * self.k)},{_fmt(MARGIN + (self.y1 - p[1]) * self.k)}"

    def pts(self, ring) -> str:
        return " ".join(self.pt(p) for p in ring)


def _cell_rings(decomposition):
    if decomposition is None:
        return []
    cells = getattr(decomposition, "cells", decomposition)
    return [list(getattr(c, "ring", None).vertices) if hasattr(c, "ring") else list(c) for c in cells]


def _path_parts(path):
    if path is None:
        return None
    if isinstance(path, dict):
        return [tuple(p) for p in path["waypoints"]], list(path["segment_tags"])
    return list(path.waypoints), list(path.segment_tags)


def render_svg(map_file, decomposition=None, path=None) -> str:
    """Layers bottom-up: free space, holes, cell outlines, transitions, sweeps, terminals.

    ``decomposition`` is a :class:`Decomposition` or a list of cell rings;
    ``path`` is a :class:`CoveragePath` or its JSON dictionary.
    """
    f = _Frame(map_file.outer)
    rings = _cell_rings(decomposition)
    parts = _path_parts(path)
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {int(SIZE)} {int(SIZE)}" '
        f'width="{int(SIZE)}" height="{int(SIZE)}">',
        f'<g id="free"><polygon points="{f.pts(map_file.outer)}" fill="white" stroke="black" stroke-width="2"/></g>',
    ]
    if map_file.holes:
        out.append('<g id="holes">')
        out += [f'<polygon points="{f.pts(h)}" fill="#d62728" stroke="#7f1010" stroke-width="1"/>' for h in map_file.holes]
        out.append("</g>")
    if rings:
        out.append('<g id="cells" fill="none" stroke="#555555" stroke-width="1" stroke-dasharray="6,4">')
        out += [f'<polyline points="{f.pts([*r, r[0]])}"/>' for r in rings]
        out.append("</g>")
    if parts is not None:
        w, tags = parts
        for tag, colour in (("transition", "#ff7f0e"), ("sweep", "#1f77b4")):
            out.append(f'<g id="{tag}s" stroke={quoteattr(colour)} stroke-width="2" fill="none">')
            for k, t in enumerate(tags):
                if t == tag:
                    (x1, y1), (x2, y2) = f.pt(w[k]).split(","), f.pt(w[k + 1]).split(",")
                    out.append(f'<line x1="{x1}" y1="{y1}" x2="{x2}" y2="{y2}"/>')
            out.append("</g>")
        s, g = w[0], w[-1]
        out.append('<g id="terminals">')
        sx, sy = f.pt(s).split(",")
        gx, gy = f.pt(g).split(",")
        out.append(f'<circle id="start" cx="{sx}" cy="{sy}" r="8" fill="#2ca02c"/>')
        out.append(f'<rect id="goal" x="{_fmt(float(gx) - 6)}" y="{_fmt(float(gy) - 6)}" width="12" height="12" fill="#9467bd"/>')
        out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"
