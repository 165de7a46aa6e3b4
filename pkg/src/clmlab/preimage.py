"""Backward dynamics: preimage trees, mixed forward/backward clouds, and
polyline preimages under the map.

A point has 4, 2, 1 or 0 preimages depending on its position against the
image cone.  For curves, the four inverse branches (x-, x+) x (y-, y+) are
followed along the input; where a branch radicand hits zero the paired
branches meet on a critical line and are stitched into one continuous
output curve.  Both radicands are affine along straight segments, so
crossing points are computed exactly.

Where both radicands vanish at once (the cone vertex) the four branches
collide; curves are split conservatively there rather than guessing a
topology.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ParamPoint, TOL_GEO, as_point, map_eval_xy, preimage_radicands_xy
from .errors import DegenerateInput, NotBounded
from .geometry import Polyline, circle_polyline, square_polyline

__all__ = [
    "PreimageTree",
    "preimage_tree",
    "mixed_cloud",
    "polyline_preimage",
    "iterated_curve_preimage",
    "CIRCLE_C",
    "BOUNDARY_Q",
    "DEFAULT_POINT_BUDGET",
]

DEFAULT_POINT_BUDGET = 10**7

CIRCLE_C = "circle-c"
BOUNDARY_Q = "boundary-q"

# radicand snap: |r| below this counts as exactly zero (on a critical ray)
_R_SNAP = 1e-14


# ---------------------------------------------------------------------------
# point clouds


def _expand_points(p: ParamPoint, pts: np.ndarray, merge_tol: float = TOL_GEO):
    """All preimages of each point in pts, boundary pairs merged."""
    r1, r2 = preimage_radicands_xy(p.mu, p.epsilon, pts[:, 0], pts[:, 1])
    s1 = np.sqrt(np.maximum(r1, 0.0))
    s2 = np.sqrt(np.maximum(r2, 0.0))
    v1, v2 = r1 >= 0.0, r2 >= 0.0
    two1 = v1 & (s1 > merge_tol)
    two2 = v2 & (s2 > merge_tol)
    xm, xp = 0.5 * (1.0 - s1), 0.5 * (1.0 + s1)
    ym, yp = 0.5 * (1.0 - s2), 0.5 * (1.0 + s2)
    out = []
    for xs, xmask in ((xm, v1), (xp, two1)):
        for ys, ymask in ((ym, v2), (yp, two2)):
            m = xmask & ymask
            if m.any():
                out.append(np.column_stack([xs[m], ys[m]]))
    if not out:
        return np.empty((0, 2))
    return np.vstack(out)


@dataclass
class PreimageTree:
    """Breadth-first preimage levels of a root point.

    ``levels[n]`` approximates the n-th preimage set intersected with the
    clip window; level 0 is the root itself.
    """

    root: np.ndarray
    levels: list[np.ndarray]
    budget_exhausted: bool

    def all_points(self) -> np.ndarray:
        return np.vstack(self.levels)

    def total_points(self) -> int:
        return sum(len(lv) for lv in self.levels[1:])


def _clip_points(pts: np.ndarray, clip) -> np.ndarray:
    if clip is None or len(pts) == 0:
        return pts
    xmin, xmax, ymin, ymax = clip
    m = (
        (pts[:, 0] >= xmin)
        & (pts[:, 0] <= xmax)
        & (pts[:, 1] >= ymin)
        & (pts[:, 1] <= ymax)
    )
    return pts[m]


def preimage_tree(
    p: ParamPoint,
    root,
    depth: int,
    point_budget: int = DEFAULT_POINT_BUDGET,
    clip: tuple[float, float, float, float] | None = None,
) -> PreimageTree:
    """Expand preimages breadth-first to ``depth`` levels or ``point_budget``.

    Clipping discards points outside ``clip`` before they are expanded.
    Empty levels are legitimate (the expansion died outside the cone).
    """
    if depth < 0:
        raise DegenerateInput("depth must be nonnegative")
    root = as_point(root)
    levels = [np.array([[root.x, root.y]])]
    total = 0
    exhausted = False
    for _ in range(depth):
        parents = levels[-1]
        if len(parents) == 0:
            levels.append(np.empty((0, 2)))
            continue
        remaining = point_budget - total
        if remaining <= 0:
            exhausted = True
            break
        max_parents = -(-remaining // 4)
        if len(parents) > max_parents:
            parents = parents[:max_parents]
            exhausted = True
        children = _clip_points(_expand_points(p, parents), clip)
        total += len(children)
        levels.append(children)
        if exhausted:
            break
    return PreimageTree(levels[0][0], levels, exhausted)


def mixed_cloud(
    p: ParamPoint, seed, n_forward: int, depth_back: int, budget: int
) -> np.ndarray:
    """Union of the preimage trees of the first n_forward forward iterates.

    Raises NotBounded if the forward orbit escapes before n_forward steps.
    The budget is shared across the whole union.
    """
    if n_forward + depth_back <= 0:
        raise DegenerateInput("n_forward + depth_back must be positive")
    from .orbits import escape_mode
    from ._kernels import orbit_after

    seed = as_point(seed)
    heads, esc = orbit_after(
        p.mu, p.epsilon, seed.x, seed.y, 0, n_forward + 1, escape_mode(p)
    )
    if esc >= 0:
        raise NotBounded(esc)
    chunks = []
    left = budget
    for head in heads:
        tree = preimage_tree(p, head, depth_back, point_budget=max(left, 0))
        pts = tree.all_points()
        chunks.append(pts)
        left -= tree.total_points()
        if left <= 0:
            break
    return np.vstack(chunks)


# ---------------------------------------------------------------------------
# curve preimages


@dataclass
class _Run:
    """Maximal in-cone piece of the input curve.

    ``start_kind``/``end_kind`` say how the piece terminates: at a curve
    endpoint ("end"), on a critical-value ray ("L1"/"L2"), at the cone
    vertex ("both"), or nowhere for a fully interior closed loop ("cycle").
    """

    points: np.ndarray
    start_kind: str
    end_kind: str


def _kind_at(a: float, b: float) -> str:
    if a == 0.0 and b == 0.0:
        return "both"
    if a == 0.0:
        return "L1"
    if b == 0.0:
        return "L2"
    return "end"


def _augmented_path(p: ParamPoint, vertices: np.ndarray, closed: bool):
    """Vertices plus exact radicand zero crossings, as (point, r1, r2) rows.

    Radicands are affine along straight segments, so crossings are solved
    exactly; values within the snap tolerance collapse to 0.
    """
    pts = np.vstack([vertices, vertices[:1]]) if closed else vertices
    r1, r2 = preimage_radicands_xy(p.mu, p.epsilon, pts[:, 0], pts[:, 1])
    r1 = np.where(np.abs(r1) < _R_SNAP, 0.0, r1)
    r2 = np.where(np.abs(r2) < _R_SNAP, 0.0, r2)
    rows = []
    for i in range(len(pts) - 1):
        rows.append((pts[i], r1[i], r2[i]))
        ra = (r1[i], r2[i])
        rb = (r1[i + 1], r2[i + 1])
        events = []
        for j in (0, 1):
            if (ra[j] > 0.0 > rb[j]) or (ra[j] < 0.0 < rb[j]):
                events.append((ra[j] / (ra[j] - rb[j]), j))
        for t, j in sorted(events):
            q = pts[i] + t * (pts[i + 1] - pts[i])
            rq = [ra[0] + t * (rb[0] - ra[0]), ra[1] + t * (rb[1] - ra[1])]
            rq[j] = 0.0
            rows.append((q, rq[0], rq[1]))
    rows.append((pts[-1], r1[-1], r2[-1]))
    return rows


def _runs_of(p: ParamPoint, vertices: np.ndarray, closed: bool) -> list[_Run]:
    """Split the curve into maximal in-cone runs with typed endpoints.

    Runs end at radicand zero crossings (the curve exits the cone), at the
    cone vertex (both radicands zero, split conservatively), or at the
    curve's own endpoints.  A closed curve staying inside the cone with no
    vertex touch is a single cyclic run.
    """
    rows = _augmented_path(p, vertices, closed)
    if closed:
        rows = rows[:-1]
        anchors = [
            i
            for i, (_, a, b) in enumerate(rows)
            if (a < 0.0 or b < 0.0) or (a == 0.0 and b == 0.0)
        ]
        if not anchors:
            return [_Run(np.array([q for q, _, _ in rows]), "cycle", "cycle")]
        k = anchors[0]
        rows = rows[k:] + rows[: k + 1]

    runs: list[_Run] = []
    cur: list | None = None

    def flush():
        nonlocal cur
        if cur is not None and len(cur) >= 2:
            runs.append(
                _Run(
                    np.array([q for q, _, _ in cur]),
                    _kind_at(cur[0][1], cur[0][2]),
                    _kind_at(cur[-1][1], cur[-1][2]),
                )
            )
        cur = None

    for row in rows:
        _, a, b = row
        if a >= 0.0 and b >= 0.0:
            if cur is None:
                cur = [row]
            else:
                cur.append(row)
            if a == 0.0 and b == 0.0:
                # cone vertex: close here and restart from the same point
                flush()
                cur = [row]
        else:
            flush()
    flush()
    return runs


def _branch_points(p: ParamPoint, run_pts: np.ndarray):
    """The four branch polylines over a run, keyed by sign pair."""
    r1, r2 = preimage_radicands_xy(p.mu, p.epsilon, run_pts[:, 0], run_pts[:, 1])
    s1 = np.sqrt(np.maximum(r1, 0.0))
    s2 = np.sqrt(np.maximum(r2, 0.0))
    xm, xp = 0.5 * (1.0 - s1), 0.5 * (1.0 + s1)
    ym, yp = 0.5 * (1.0 - s2), 0.5 * (1.0 + s2)
    return {
        ("-", "-"): np.column_stack([xm, ym]),
        ("-", "+"): np.column_stack([xm, yp]),
        ("+", "-"): np.column_stack([xp, ym]),
        ("+", "+"): np.column_stack([xp, yp]),
    }


def _stitch_run(p: ParamPoint, run: _Run) -> list[tuple[np.ndarray, bool]]:
    """Join the four branch curves of one run where they meet on a ray.

    A run end on L1 merges the x-branch pairs there; on L2 the y-branch
    pairs.  Curve endpoints and cone-vertex ends stay free.  Chains of
    branches become one output curve each, traversed with alternating
    orientation across merge points.
    """
    branches = _branch_points(p, run.points)
    keys = list(branches)
    if run.start_kind == "cycle":
        return [(branches[k], True) for k in keys]

    # links pair up branch ends: side 0 is the run start, side 1 the run end
    links: dict[tuple[int, int], tuple[int, int]] = {}
    for kind, side in ((run.start_kind, 0), (run.end_kind, 1)):
        if kind == "L1":
            pairs = [(("-", "-"), ("+", "-")), (("-", "+"), ("+", "+"))]
        elif kind == "L2":
            pairs = [(("-", "-"), ("-", "+")), (("+", "-"), ("+", "+"))]
        else:
            continue
        for ka, kb in pairs:
            a, b = keys.index(ka), keys.index(kb)
            links[(a, side)] = (b, side)
            links[(b, side)] = (a, side)

    def walk(entry: tuple[int, int]):
        """Concatenate branches starting by entering ``entry[0]`` at ``entry[1]``."""
        chain = []
        cur, side = entry
        while True:
            used.add(cur)
            seg = branches[keys[cur]]
            chain.append(seg if side == 0 else seg[::-1])
            nxt = links.get((cur, 1 - side))
            if nxt is None or nxt[0] in used:
                closed = nxt is not None and nxt[0] == entry[0] and nxt[1] == entry[1]
                return np.vstack(chain), closed
            cur, side = nxt

    used: set[int] = set()
    out = []
    free = [e for b in range(4) for e in [(b, 0), (b, 1)] if e not in links]
    for e in free:
        if e[0] not in used:
            out.append(walk(e))
    for b in range(4):  # components with no free end are closed chains
        if b not in used:
            out.append(walk((b, 0)))
    return out


def _preimage_curves(p: ParamPoint, curve: Polyline) -> list[tuple[np.ndarray, bool]]:
    """Stitched preimage curves of a polyline (unresampled)."""
    if len(curve) < 2:
        raise DegenerateInput("curve needs at least 2 vertices")
    out = []
    for run in _runs_of(p, curve.vertices, curve.closed):
        out.extend(_stitch_run(p, run))
    cleaned = []
    for pts, closed in out:
        d = np.hypot(*np.diff(pts, axis=0).T)
        keep = np.concatenate([[True], d > 0.0])
        pts = pts[keep]
        if len(pts) >= 2:
            if not closed and np.hypot(*(pts[0] - pts[-1])) <= 1e-12:
                closed = True
            cleaned.append((pts, closed))
    return cleaned


def polyline_preimage(p: ParamPoint, curve: Polyline, resample: int) -> list[Polyline]:
    """Preimage of a sampled curve as a list of continuous branches.

    Branches are grouped by inverse-branch sign continuity, split where the
    curve exits the cone, joined where branch pairs meet on a critical
    line, and resampled to ``resample`` vertices by arclength.  A curve
    going through both rays (endpoints on the rays, interior inside the
    cone) yields exactly one closed output curve.
    """
    return [
        Polyline(pts, closed).resample(resample)
        for pts, closed in _preimage_curves(p, curve)
    ]


def _seed_polyline(seed: str, resample: int) -> Polyline:
    if seed == CIRCLE_C:
        return circle_polyline(resample)
    if seed == BOUNDARY_Q:
        return square_polyline(max(2, resample // 4))
    raise DegenerateInput(f"unknown seed curve {seed!r}")


def iterated_curve_preimage(
    p: ParamPoint, seed: str, n: int, resample: int
) -> list[Polyline]:
    """n-fold curve preimage of the circle C or the boundary of the square.

    Returns all connected branches of the final stage; n=0 returns the seed
    discretization itself.
    """
    if n < 0:
        raise DegenerateInput("n must be nonnegative")
    curves = [_seed_polyline(seed, resample)]
    for _ in range(n):
        nxt: list[Polyline] = []
        for c in curves:
            nxt.extend(polyline_preimage(p, c, resample))
        curves = nxt
        if not curves:
            break
    return curves
