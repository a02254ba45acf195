"""Polygonal obstacles and penetration queries.

Obstacles are simple polygons in the earth frame (x0 north, y0 east).
Containment uses the nonzero winding rule with an explicit on-boundary
test; penetration is the distance from an interior point to the boundary,
zero outside. Boundary points count as inside with zero penetration so
the penalty is continuous across the edge.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


def _signed_area(v: np.ndarray) -> float:
    x = v[:, 0]
    y = v[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def _segments_cross(p1, p2, q1, q2) -> bool:
    """Proper intersection test for the simplicity check (shared endpoints excluded)."""
    def orient(a, b, c):
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
    d1 = orient(q1, q2, p1)
    d2 = orient(q1, q2, p2)
    d3 = orient(p1, p2, q1)
    d4 = orient(p1, p2, q2)
    return ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0))


@dataclass
class PolygonObstacle:
    """Simple polygon, counterclockwise orientation enforced at construction."""

    vertices: np.ndarray
    label: str = ""

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=np.float64)
        if v.ndim != 2 or v.shape[1] != 2 or v.shape[0] < 3:
            raise ValueError(f"polygon '{self.label}' needs >= 3 two-dimensional vertices")
        if not np.all(np.isfinite(v)):
            raise ValueError(f"polygon '{self.label}' has non-finite vertices")
        area = _signed_area(v)
        if area == 0.0:
            raise ValueError(f"polygon '{self.label}' is degenerate")
        if area < 0.0:
            v = v[::-1].copy()  # normalize to counterclockwise
        n = v.shape[0]
        for i in range(n):
            a1, a2 = v[i], v[(i + 1) % n]
            for j in range(i + 1, n):
                if j == i or (j + 1) % n == i or (i + 1) % n == j:
                    continue
                if _segments_cross(a1, a2, v[j], v[(j + 1) % n]):
                    raise ValueError(f"polygon '{self.label}' is self-intersecting")
        self.vertices = v

    def edges(self):
        v = self.vertices
        return zip(v, np.roll(v, -1, axis=0))


@dataclass
class Port:
    """Static port layout: obstacle set plus the directed berth line."""

    obstacles: list
    berth_line: np.ndarray  # (2, 2) endpoints [m]
    berth_angle: float      # theta_b [rad], angle of the berth line from north

    def __post_init__(self):
        b = np.asarray(self.berth_line, dtype=np.float64)
        if b.shape != (2, 2):
            raise ValueError("berth_line must be two 2-D endpoints")
        if np.allclose(b[0], b[1]):
            raise ValueError("berth_line endpoints must be distinct")
        self.berth_line = b


def _on_segment(px, py, ax, ay, bx, by) -> bool:
    cross = (bx - ax) * (py - ay) - (by - ay) * (px - ax)
    if cross != 0.0:
        return False
    dot = (px - ax) * (bx - ax) + (py - ay) * (by - ay)
    if dot < 0.0:
        return False
    return dot <= (bx - ax) ** 2 + (by - ay) ** 2


def contains(polygon: PolygonObstacle, p) -> bool:
    """True iff p is strictly inside or on the boundary (nonzero winding rule)."""
    px, py = float(p[0]), float(p[1])
    v = polygon.vertices
    n = v.shape[0]
    wn = 0
    for i in range(n):
        ax, ay = v[i, 0], v[i, 1]
        bx, by = v[(i + 1) % n, 0], v[(i + 1) % n, 1]
        if _on_segment(px, py, ax, ay, bx, by):
            return True
        if ay <= py:
            if by > py and (bx - ax) * (py - ay) - (by - ay) * (px - ax) > 0.0:
                wn += 1
        else:
            if by <= py and (bx - ax) * (py - ay) - (by - ay) * (px - ax) < 0.0:
                wn -= 1
    return wn != 0


def _point_segment_distance(px, py, ax, ay, bx, by) -> float:
    dx = bx - ax
    dy = by - ay
    dd = dx * dx + dy * dy
    if dd == 0.0:
        ex = px - ax
        ey = py - ay
        return math.sqrt(ex * ex + ey * ey)
    t = ((px - ax) * dx + (py - ay) * dy) / dd
    if t < 0.0:
        t = 0.0
    elif t > 1.0:
        t = 1.0
    ex = px - (ax + t * dx)
    ey = py - (ay + t * dy)
    return math.sqrt(ex * ex + ey * ey)


def penetration_length(polygon: PolygonObstacle, p) -> float:
    """Depth of intrusion: min distance from p to the boundary if inside, else 0."""
    px, py = float(p[0]), float(p[1])
    if not contains(polygon, (px, py)):
        return 0.0
    v = polygon.vertices
    n = v.shape[0]
    best = math.inf
    for i in range(n):
        d = _point_segment_distance(px, py, v[i, 0], v[i, 1],
                                    v[(i + 1) % n, 0], v[(i + 1) % n, 1])
        if d < best:
            best = d
    return best
