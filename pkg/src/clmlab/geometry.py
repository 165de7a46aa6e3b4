"""Polylines and plane-geometry utilities shared by the curve engines."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

__all__ = [
    "Polyline",
    "arc_lengths",
    "resample_polyline",
    "hausdorff_distance",
    "points_to_polyline_distance",
    "point_in_polygon",
    "circle_polyline",
    "square_polyline",
]


@dataclass
class Polyline:
    """Ordered sampled curve; ``closed`` means the last vertex joins the first.

    Consecutive vertices are kept distinct; for closed curves the closing
    vertex is implicit (first != last in storage).
    """

    vertices: np.ndarray
    closed: bool = False

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2:
            raise ValueError("vertices must have shape (n, 2)")
        v = _drop_repeats(v)
        if self.closed and len(v) > 1 and np.allclose(v[0], v[-1], atol=0.0):
            v = v[:-1]
        object.__setattr__(self, "vertices", v)

    def __len__(self) -> int:
        return len(self.vertices)

    def segments(self) -> tuple[np.ndarray, np.ndarray]:
        """Segment start and end vertex arrays, including the closing edge."""
        v = self.vertices
        if self.closed:
            return v, np.roll(v, -1, axis=0)
        return v[:-1], v[1:]

    def length(self) -> float:
        a, b = self.segments()
        return float(np.sum(np.hypot(*(b - a).T)))

    def resample(self, n: int) -> "Polyline":
        return Polyline(resample_polyline(self.vertices, n, self.closed), self.closed)

    def reversed(self) -> "Polyline":
        return Polyline(self.vertices[::-1].copy(), self.closed)

    def reflected(self) -> "Polyline":
        """Image under the swap (x, y) -> (y, x)."""
        return Polyline(self.vertices[:, ::-1].copy(), self.closed)

    def dense_points(self, per_segment: int = 4) -> np.ndarray:
        """Vertices plus evenly spaced interior points of every segment."""
        a, b = self.segments()
        ts = np.linspace(0.0, 1.0, per_segment, endpoint=False)
        pts = (a[:, None, :] + ts[None, :, None] * (b - a)[:, None, :]).reshape(-1, 2)
        return np.vstack([pts, self.vertices[-1:]])


def _drop_repeats(v: np.ndarray, tol: float = 0.0) -> np.ndarray:
    if len(v) < 2:
        return v
    d = np.hypot(*(np.diff(v, axis=0)).T)
    keep = np.concatenate([[True], d > tol])
    return v[keep]


def arc_lengths(vertices: np.ndarray, closed: bool = False) -> np.ndarray:
    """Cumulative chord length at each vertex (plus closing edge if closed)."""
    d = np.hypot(*(np.diff(vertices, axis=0)).T)
    if closed:
        d = np.append(d, np.hypot(*(vertices[0] - vertices[-1])))
    return np.concatenate([[0.0], np.cumsum(d)])


def resample_polyline(vertices: np.ndarray, n: int, closed: bool = False) -> np.ndarray:
    """Resample to n vertices by chord-length parameterization."""
    vertices = np.asarray(vertices, dtype=float)
    if len(vertices) == 1:
        return np.repeat(vertices, n, axis=0)
    pts = np.vstack([vertices, vertices[:1]]) if closed else vertices
    s = arc_lengths(pts)
    total = s[-1]
    if total == 0.0:
        return np.repeat(vertices[:1], n, axis=0)
    target = np.linspace(0.0, total, n, endpoint=not closed)
    x = np.interp(target, s, pts[:, 0])
    y = np.interp(target, s, pts[:, 1])
    return np.column_stack([x, y])


def _refined(curve: Polyline | np.ndarray, per_segment: int) -> np.ndarray:
    if isinstance(curve, Polyline):
        return curve.dense_points(per_segment)
    return np.asarray(curve, dtype=float)


def points_to_polyline_distance(
    points: np.ndarray, curve: Polyline, per_segment: int = 8
) -> np.ndarray:
    """Distance from each point to the curve, via a refined vertex cloud.

    Refinement bounds the cloud error by half the refined spacing, which is
    negligible against the grid tolerances used by callers.
    """
    tree = cKDTree(curve.dense_points(per_segment))
    return tree.query(np.asarray(points, dtype=float))[0]


def hausdorff_distance(a, b, per_segment: int = 8) -> float:
    """Symmetric Hausdorff distance between two curves or point clouds."""
    pa = _refined(a, per_segment)
    pb = _refined(b, per_segment)
    ta, tb = cKDTree(pa), cKDTree(pb)
    return float(max(tb.query(pa)[0].max(), ta.query(pb)[0].max()))


def point_in_polygon(
    points: np.ndarray, polygon: np.ndarray, chunk: int = 2048
) -> np.ndarray:
    """Even-odd ray casting; True for points inside the closed polygon."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    poly = np.asarray(polygon, dtype=float)
    ax, ay = poly[:, 0], poly[:, 1]
    bx, by = np.roll(ax, -1), np.roll(ay, -1)
    dy = np.where(by == ay, 1.0, by - ay)
    inside = np.zeros(len(pts), dtype=bool)
    for i in range(0, len(pts), chunk):
        x = pts[i : i + chunk, 0][:, None]
        y = pts[i : i + chunk, 1][:, None]
        crosses = (ay > y) != (by > y)
        xc = ax + (y - ay) / dy * (bx - ax)
        inside[i : i + chunk] = ((crosses & (x < xc)).sum(axis=1) % 2).astype(bool)
    return inside


def circle_polyline(n: int, center=(0.5, 0.5), radius: float = np.sqrt(0.5)) -> Polyline:
    """Closed discretization of the circle x^2 + y^2 = x + y (by default)."""
    th = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
    return Polyline(
        np.column_stack([center[0] + radius * np.cos(th), center[1] + radius * np.sin(th)]),
        closed=True,
    )


def square_polyline(n_per_side: int) -> Polyline:
    """Closed discretization of the unit-square boundary, corners included."""
    t = np.linspace(0.0, 1.0, n_per_side, endpoint=False)
    zeros, ones = np.zeros_like(t), np.ones_like(t)
    pts = np.vstack(
        [
            np.column_stack([t, zeros]),
            np.column_stack([ones, t]),
            np.column_stack([1.0 - t, ones]),
            np.column_stack([zeros, 1.0 - t]),
        ]
    )
    return Polyline(pts, closed=True)
