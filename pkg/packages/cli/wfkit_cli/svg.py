"""
Polar roses of cone verdicts as plain SVG 1.1

One row per analysis point, one panel per k. Each cone of the cover is
drawn as a sector colored by the verdict of a single detector.
"""

import math
from typing import Dict, List, Optional, Sequence, Tuple
from xml.sax.saxutils import escape

from wfkit import Cone, WavefrontReport

COLORS = {
    "singular": "#d62728",
    "regular": "#2ca02c",
    "indeterminate": "#7f7f7f",
}

PANEL = 180
RADIUS = 62
HEADER = 36
LEGEND = 34


def _cones(report: WavefrontReport) -> List[Cone]:
    cover = report.parameters.get("cover") or {}
    return [Cone.from_dict(c) for c in cover.get("cones", [])]


def _angles(cone: Cone) -> Tuple[float, float]:
    """(axis angle, half-angle) in the plane; rays lie on the horizontal axis"""
    if cone.dim == 1:
        return (0.0 if cone.axis[0] > 0 else math.pi), min(cone.half_angle, math.pi / 2)
    return math.atan2(cone.axis[1], cone.axis[0]), cone.half_angle


def _sector(cx: float, cy: float, r: float, theta: float, half: float, color: str) -> str:
    if half >= math.pi:
        return (f'<circle cx="{cx:.2f}" cy="{cy:.2f}" r="{r:.2f}" fill="{color}" '
                f'fill-opacity="0.75" stroke="#ffffff" stroke-width="1"/>')
    start, end = theta - half, theta + half
    x1, y1 = cx + r * math.cos(start), cy - r * math.sin(start)
    x2, y2 = cx + r * math.cos(end), cy - r * math.sin(end)
    large = 1 if 2 * half > math.pi else 0
    return (f'<path d="M {cx:.2f} {cy:.2f} L {x1:.2f} {y1:.2f} '
            f'A {r:.2f} {r:.2f} 0 {large} 0 {x2:.2f} {y2:.2f} Z" fill="{color}" '
            f'fill-opacity="0.75" stroke="#ffffff" stroke-width="1"/>')


def _text(x: float, y: float, label: str, size: int = 12, anchor: str = "middle") -> str:
    return (f'<text x="{x:.2f}" y="{y:.2f}" font-family="sans-serif" font-size="{size}" '
            f'text-anchor="{anchor}">{escape(label)}</text>')


def _point_label(point: Sequence[float]) -> str:
    return ", ".join(f"{v:g}" for v in point)


def pick_detector(report: WavefrontReport) -> str:
    detectors = [c.detector for c in report.cells]
    return "WF_FL" if "WF_FL" in detectors else (detectors[0] if detectors else "WF_FL")


def render_polar(report: WavefrontReport, detector: Optional[str] = None) -> str:
    """SVG document with one polar rose per (point, k)"""
    detector = detector or pick_detector(report)
    q = report.parameters.get("q")
    cells = [c for c in report.cells_for(detector) if q is None or c.q == q]
    verdicts: Dict[Tuple, str] = {(c.point, c.k, c.cone_id): c.classification for c in cells}
    points = report.points
    ks = sorted({c.k for c in cells})
    cones = _cones(report)

    width = PANEL * max(1, len(ks))
    height = HEADER + PANEL * max(1, len(points)) + LEGEND
    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="#ffffff"/>',
        _text(width / 2, 22, f"{report.atom_id}: {detector} verdicts", 14),
    ]
    for row, point in enumerate(points):
        for col, k in enumerate(ks):
            cx = col * PANEL + PANEL / 2
            cy = HEADER + row * PANEL + PANEL / 2 + 8
            parts.append(_text(cx, cy - RADIUS - 14, f"x₀ = ({_point_label(point)}), k = {k:g}", 11))
            parts.append(f'<circle cx="{cx:.2f}" cy="{cy:.2f}" r="{RADIUS + 2}" fill="none" '
                         f'stroke="#cccccc" stroke-width="1"/>')
            for cone in cones:
                verdict = verdicts.get((point, k, cone.cone_id), "indeterminate")
                theta, half = _angles(cone)
                parts.append(_sector(cx, cy, RADIUS, theta, half, COLORS.get(verdict, COLORS["indeterminate"])))

    y = height - LEGEND / 2
    for i, (label, color) in enumerate(COLORS.items()):
        x = 12 + i * 110
        parts.append(f'<rect x="{x}" y="{y - 6:.2f}" width="12" height="12" fill="{color}"/>')
        parts.append(_text(x + 18, y + 4, label, 11, "start"))
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
