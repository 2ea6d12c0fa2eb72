"""SVG rendering of layouts and agent paths (robot red, human purple)."""

from __future__ import annotations

from xml.sax.saxutils import escape

from .cost import Solution
from .geometry import Layout
from .recipe import Agent

SCALE = 50.0  # pixels per meter
MARGIN = 20.0

AGENT_COLORS = {Agent.ROBOT: "#d62728", Agent.HUMAN: "#7b2d8b"}


def _tx(layout: Layout):
    xmin, ymin, xmax, ymax = layout.room.bbox

    def fn(x: float, y: float) -> tuple[float, float]:
        # flip y so +y points up on screen
        return (MARGIN + (x - xmin) * SCALE, MARGIN + (ymax - y) * SCALE)

    w = (xmax - xmin) * SCALE + 2 * MARGIN
    h = (ymax - ymin) * SCALE + 2 * MARGIN
    return fn, w, h


def render_layout(layout: Layout, paths_by_agent=None, title: str = "") -> str:
    """Draw the room outline, labeled counters and optional agent paths."""
    tx, w, h = _tx(layout)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0f}" height="{h:.0f}" '
        f'viewBox="0 0 {w:.0f} {h:.0f}">',
        f'<rect x="0" y="0" width="{w:.0f}" height="{h:.0f}" fill="white"/>',
    ]
    pts = " ".join("{:.1f},{:.1f}".format(*tx(p.x, p.y))
                   for p in layout.room.boundary)
    parts.append(f'<polygon points="{pts}" fill="#f7f5f0" stroke="black" '
                 'stroke-width="2"/>')
    for a, b in layout.room.interior_walls:
        x1, y1 = tx(a.x, a.y)
        x2, y2 = tx(b.x, b.y)
        parts.append(f'<line x1="{x1:.1f}" y1="{y1:.1f}" x2="{x2:.1f}" y2="{y2:.1f}" '
                     'stroke="#999" stroke-width="2" stroke-dasharray="6 4"/>')
    for c in layout.counters:
        xmin, ymin, xmax, ymax = c.footprint
        x1, y1 = tx(xmin, ymax)
        bw = (xmax - xmin) * SCALE
        bh = (ymax - ymin) * SCALE
        parts.append(f'<rect x="{x1:.1f}" y="{y1:.1f}" width="{bw:.1f}" '
                     f'height="{bh:.1f}" fill="#c8a165" stroke="#5a3d1e" '
                     'stroke-width="1.5"/>')
        fx, fy = c.front_face_center
        px, py = tx(fx, fy)
        parts.append(f'<circle cx="{px:.1f}" cy="{py:.1f}" r="3" fill="#5a3d1e"/>')
        lx, ly = tx(c.position.x, c.position.y)
        parts.append(f'<text x="{lx:.1f}" y="{ly + 4:.1f}" font-size="11" '
                     f'text-anchor="middle" font-family="sans-serif">'
                     f'{escape(c.kind.value)}</text>')
    if paths_by_agent:
        for agent, paths in paths_by_agent.items():
            color = AGENT_COLORS[agent]
            for path in paths:
                if len(path.nodes) < 2:
                    continue
                pl = " ".join("{:.1f},{:.1f}".format(*tx(n.q[0], n.q[1]))
                              for n in path.nodes)
                parts.append(f'<polyline points="{pl}" fill="none" '
                             f'stroke="{color}" stroke-width="1.5" opacity="0.8"/>')
    if title:
        parts.append(f'<text x="{MARGIN:.0f}" y="{h - 5:.1f}" font-size="12" '
                     f'font-family="sans-serif">{escape(title)}</text>')
    parts.append("</svg>")
    return "\n".join(parts)


def render_solution(solution: Solution, title: str = "") -> str:
    """SVG for one solution: layout plus both agents' path segments."""
    paths = None
    if solution.outcome is not None:
        paths = {agent: solution.outcome.paths_for(agent)
                 for agent in (Agent.HUMAN, Agent.ROBOT)}
    return render_layout(solution.layout, paths, title)
