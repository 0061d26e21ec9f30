"""Deterministic SVG drawings of behaviour graphs.

Measurements sit on a circle as quads of four sections (Level top-left,
Reflect top-right, Rise bottom-left, Fall bottom-right). Each section is
filled from the colourspace with (windowed, whole-trace) expectation. An
edge runs from a black dot just outside the source section's corner to the
centre of the destination section; the dot swings up to 30 degrees either
side of the corner diagonal in proportion to ``delta / D``.
"""

from __future__ import annotations

import html
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .colorspace import DEFAULT_GAMMA, map2d
from .graph import BehaviourGraph, Edge, NodeStats
from .trace import ALL_KINDS, ImpliedKind

# unit vectors from a quad centre towards each section's outer corner (SVG y is down)
CORNERS = {
    ImpliedKind.LEVEL: (-1, -1),
    ImpliedKind.REFLECT: (1, -1),
    ImpliedKind.RISE: (-1, 1),
    ImpliedKind.FALL: (1, 1),
}
DOT_ARC = math.radians(30)


def _f(x: float) -> str:
    s = f"{x:.3f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def _num(x) -> str:
    return "undefined" if x is None else f"{x:.6f}"


@dataclass(frozen=True)
class Style:
    canvas: float = 1200.0
    text_size: float = 10.0
    edge_width: float = 4.0
    dot_radius: float = 4.0
    dot_offset: float = 6.0
    gamma: float = DEFAULT_GAMMA
    delta_max: int = 16


@dataclass(frozen=True)
class Layout:
    radius: float
    centre: tuple[float, float]
    node_positions: tuple[tuple[float, float, float], ...]  # (angle, x, y)
    quad_size: float
    style: Style = field(default_factory=Style)

    @classmethod
    def circle(cls, n: int, style: Style = Style()) -> "Layout":
        """Evenly spaced positions starting at twelve o'clock, clockwise."""
        c = style.canvas / 2
        radius = style.canvas * 0.38
        positions = []
        for i in range(n):
            ang = -math.pi / 2 + 2 * math.pi * i / n
            positions.append((ang, c + radius * math.cos(ang), c + radius * math.sin(ang)))
        if n > 1:
            chord = 2 * radius * math.sin(math.pi / n)
            quad = min(48.0, 0.55 * chord)
        else:
            quad = 48.0
        return cls(radius, (c, c), tuple(positions), max(quad, 6.0), style)

    def corner(self, node: int, kind: ImpliedKind) -> tuple[float, float]:
        _, x, y = self.node_positions[node]
        dx, dy = CORNERS[kind]
        h = self.quad_size / 2
        return x + dx * h, y + dy * h

    def section_centre(self, node: int, kind: ImpliedKind) -> tuple[float, float]:
        _, x, y = self.node_positions[node]
        dx, dy = CORNERS[kind]
        q = self.quad_size / 4
        return x + dx * q, y + dy * q


def render_node(stats: NodeStats, layout: Layout, node: int) -> str:
    _, x, y = layout.node_positions[node]
    s = layout.quad_size / 2
    gamma = layout.style.gamma
    name = html.escape(stats.id.name)
    out = [f'<g class="node" id="node-{node}" transform="translate({_f(x)},{_f(y)})">']
    for kind in ALL_KINDS:
        dx, dy = CORNERS[kind]
        a, b = stats.ex_window[kind], stats.ex_global[kind]
        colour = map2d(min(max(a, 0.0), 1.0), min(max(b, 0.0), 1.0), gamma).hex()
        out.append(
            f'<rect class="section {kind.label.lower()}" x="{_f(-s if dx < 0 else 0)}" '
            f'y="{_f(-s if dy < 0 else 0)}" width="{_f(s)}" height="{_f(s)}" fill="{colour}">'
            f"<title>{name} {kind.label}: window {_num(a)}, global {_num(b)}</title></rect>"
        )
    # label sits outside the circle along the radial direction
    ang = layout.node_positions[node][0]
    lx, ly = (s + 8) * math.cos(ang) * 1.4, (s + 8) * math.sin(ang) * 1.4
    anchor = "middle" if abs(math.cos(ang)) < 0.3 else ("start" if math.cos(ang) > 0 else "end")
    out.append(
        f'<text x="{_f(lx)}" y="{_f(ly)}" text-anchor="{anchor}" '
        f'dominant-baseline="middle">{name}</text>'
    )
    out.append("</g>")
    return "\n".join(out)


def render_edge(edge: Edge, layout: Layout, index: dict[int, int]) -> str:
    """*index* maps measurement index to layout position."""
    st = layout.style
    src, dst = index[edge.src[0].index], index[edge.dst[0].index]
    cx, cy = layout.corner(src, edge.src[1])
    dx, dy = CORNERS[edge.src[1]]
    bis = math.atan2(dy, dx)
    frac = edge.delta / st.delta_max if st.delta_max > 0 else 0.0
    ang = bis + DOT_ARC * max(-1.0, min(1.0, frac))
    px, py = cx + st.dot_offset * math.cos(ang), cy + st.dot_offset * math.sin(ang)
    tx, ty = layout.section_centre(dst, edge.dst[1])
    colour = map2d(min(edge.dep, 1.0), min(edge.cov, 1.0), st.gamma).hex()
    width = st.edge_width * edge.cov
    opacity = 0.25 + 0.75 * edge.dep
    r = st.dot_radius * (0.5 + 0.5 * edge.dep * edge.cov)
    title = html.escape(
        f"{edge.src[0].name} {edge.src[1].label} -> {edge.dst[0].name} {edge.dst[1].label}"
        f" | delta {edge.delta} | dep {_num(edge.dep)} | cov {_num(edge.cov)}"
        f" | cond_ex {_num(edge.cond_ex)}"
    )
    return (
        f'<g class="edge"><title>{title}</title>'
        f'<line x1="{_f(px)}" y1="{_f(py)}" x2="{_f(tx)}" y2="{_f(ty)}" stroke="{colour}" '
        f'stroke-width="{_f(width)}" stroke-opacity="{_f(opacity)}" stroke-linecap="round"/>'
        f'<circle cx="{_f(px)}" cy="{_f(py)}" r="{_f(r)}" fill="#000000"/></g>'
    )


def render_frame(graph: BehaviourGraph, layout: Layout | None = None, style: Style = Style()) -> str:
    if layout is None:
        layout = Layout.circle(len(graph.nodes), style)
    if len(layout.node_positions) != len(graph.nodes):
        raise ValueError("layout does not match the graph's nodes")
    st = layout.style
    size = _f(st.canvas)
    index = {n.id.index: i for i, n in enumerate(graph.nodes)}
    w = graph.window
    parts = [
        '<?xml version="1.0" encoding="UTF-8" standalone="no"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}" font-family="sans-serif" font-size="{_f(st.text_size)}">',
        f'<rect width="{size}" height="{size}" fill="#ffffff"/>',
        f'<text class="caption" x="{_f(st.canvas / 2)}" y="{_f(st.text_size * 2)}" '
        f'text-anchor="middle">window [{w.u}, {w.v}) alpha {_f(w.alpha)}</text>',
        '<g class="edges">',
    ]
    parts += [render_edge(e, layout, index) for e in graph.edges]
    parts.append("</g>")
    parts.append('<g class="nodes">')
    parts += [render_node(n, layout, i) for i, n in enumerate(graph.nodes)]
    parts.append("</g>")
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def frame_name(k: int, graph: BehaviourGraph) -> str:
    return f"frame_{k}_{graph.window.u}_{graph.window.v}.svg"


_INDEX = """<!DOCTYPE html>
<html>
<head><meta charset="utf-8"><title>{title}</title>
<style>body{{font-family:sans-serif}} .frame{{margin:1em 0}} img{{max-width:100%}}</style>
</head>
<body>
<h1>{title}</h1>
<ol>
{items}
</ol>
{frames}
</body>
</html>
"""


def render_index(names: Sequence[str], title: str = "behaviour graphs") -> str:
    items = "\n".join(f'<li><a href="#f{k}">{html.escape(n)}</a></li>' for k, n in enumerate(names))
    frames = "\n".join(
        f'<div class="frame" id="f{k}"><a href="{html.escape(n)}">{html.escape(n)}</a>'
        + (f' <a href="#f{k - 1}">prev</a>' if k > 0 else "")
        + (f' <a href="#f{k + 1}">next</a>' if k + 1 < len(names) else "")
        + f'<br><img src="{html.escape(n)}" alt="{html.escape(n)}"></div>'
        for k, n in enumerate(names)
    )
    return _INDEX.format(title=html.escape(title), items=items, frames=frames)


def render_sweep(
    graphs: Sequence[BehaviourGraph], out_dir: str | os.PathLike, style: Style = Style()
) -> list[Path]:
    """Write one SVG per graph plus ``index.html``; returns the written paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    layout = Layout.circle(len(graphs[0].nodes), style) if graphs else None
    written = []
    names = []
    for k, g in enumerate(graphs):
        name = frame_name(k, g)
        path = out / name
        path.write_text(render_frame(g, layout, style), encoding="utf-8")
        written.append(path)
        names.append(name)
    index = out / "index.html"
    index.write_text(render_index(names), encoding="utf-8")
    written.append(index)
    return written
