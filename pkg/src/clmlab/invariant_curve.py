"""Constructions of the positively invariant curve through the preimages of
the origin.

The bottom piece is the graph of a symmetric function on [0, 1] fixed by a
graph-transform operator: take the preimage of the graph, keep the piece
below the critical line y = 1/2, and push it back onto the grid.  Small
strength iterates from the lower arc of the circle x^2+y^2 = x+y (that
regime's operator is contracting past the pitchfork locus and monotone
before it); large strength iterates from the null function, which rises
monotonically toward the limit.  The full curve is the collage of the graph
with its three reflections.

Beyond the ray locus mu_1 no such graph exists; there the bubble-curve
sequence of closed polylines is built instead, and points outside it with
bounded orbits can be hunted as numerical evidence that the exterior is no
longer contained in the basin of infinity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .core import (
    ParamPoint,
    PlanePoint,
    Strength,
    TOL_GEO,
    loci,
    preimage_radicands_xy,
)
from .errors import (
    BranchTopologyError,
    DomainError,
    NoL1Intersection,
    NotConverged,
    OrderAmbiguity,
)
from .geometry import Polyline, point_in_polygon, points_to_polyline_distance

__all__ = [
    "LipGraph",
    "GammaCurve",
    "GammaResult",
    "TOL_LIP",
    "small_strength_operator",
    "large_strength_operator",
    "circle_arc_seed",
    "build_gamma",
    "build_gamma_sequence",
    "exterior_bounded_witnesses",
]

TOL_LIP = 1e-6  # slack on the discrete Lipschitz-1 bound
DEFAULT_N = 4096
DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITERS = 10**5


@dataclass
class LipGraph:
    """Uniform-grid sampling of a symmetric function on [0, 1].

    values[i] = h(i/N).  Construction pins h(0) = h(1) = 0 and enforces
    h(t) = h(1-t) exactly; the Lipschitz bound and the containment regions
    (disk for small strength, triangle 0 <= h <= min(t, 1-t) for large) are
    asserted by callers, not imposed.
    """

    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 1 or len(self.values) < 3:
            raise ValueError("values must be a 1-d array with at least 3 nodes")

    @property
    def n_intervals(self) -> int:
        return len(self.values) - 1

    def grid(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, len(self.values))

    def graph_points(self) -> np.ndarray:
        return np.column_stack([self.grid(), self.values])

    def lipschitz_constant(self) -> float:
        return float(np.abs(np.diff(self.values)).max() * self.n_intervals)

    def is_symmetric(self) -> bool:
        return bool(np.array_equal(self.values, self.values[::-1]))

    def sup_distance(self, other: "LipGraph") -> float:
        return float(np.abs(self.values - other.values).max())


def _symmetrized_graph(x: np.ndarray, y: np.ndarray, n: int) -> LipGraph:
    """Resample a curve onto the uniform grid as a graph and symmetrize.

    The curve must pass the vertical line test; small numerical
    backtracking (below 1e-9) is filtered, anything larger is a topology
    failure.
    """
    order_slack = 1e-9
    keep = np.empty(len(x), dtype=bool)
    keep[0] = True
    xmax = x[0]
    for i in range(1, len(x)):
        if x[i] > xmax:
            keep[i] = True
            xmax = x[i]
        else:
            if xmax - x[i] > order_slack:
                raise BranchTopologyError("preimage branch is not a graph over [0, 1]")
            keep[i] = False
    xs, ys = x[keep], y[keep]
    grid = np.linspace(0.0, 1.0, n + 1)
    h = np.interp(grid, xs, ys)
    h[0] = 0.0
    h[-1] = 0.0
    h = 0.5 * (h + h[::-1])
    return LipGraph(h)


def _lower_preimage_graph(p: ParamPoint, t: np.ndarray, g: np.ndarray, n: int) -> LipGraph:
    """Preimage of the graph {(t, g(t))}, lower piece, back on the grid.

    The graph must leave the cone through the ray L1 at a unique t*; the
    output is the concatenation of the (x-, y-) piece over [0, t*] with the
    reversed (x+, y-) piece, a curve from (0, 0) to (1, 0).
    """
    r1, r2 = preimage_radicands_xy(p.mu, p.epsilon, t, g)
    sign = np.sign(np.where(np.abs(r1) < 1e-15, 0.0, r1))
    crossings = np.nonzero((sign[:-1] >= 0) & (sign[1:] < 0))[0]
    if len(crossings) == 0:
        if np.all(r1 >= 0.0):
            raise NoL1Intersection(
                "graph never meets L1 (mu exceeds mu_1 for this strength)"
            )
        raise BranchTopologyError("graph starts outside the cone")
    i = crossings[0]
    if sign[i] == 0.0:
        t_star, g_star = t[i], g[i]
        i = i - 1
    else:
        # bisect the affine radicand on the bracketing segment to 1e-12,
        # interpolating the graph against the fixed segment endpoints
        ta, tb = t[i], t[i + 1]
        ga, gb = g[i], g[i + 1]

        def graph_at(tm):
            return ga + (gb - ga) * (tm - ta) / (tb - ta)

        a, b = ta, tb
        while b - a > 1e-12:
            m = 0.5 * (a + b)
            if preimage_radicands_xy(p.mu, p.epsilon, m, graph_at(m))[0] >= 0.0:
                a = m
            else:
                b = m
        t_star, g_star = a, graph_at(a)

    # the output fold at t* is only sqrt-resolved by the uniform grid:
    # pack extra samples toward t* so the fold is evenly sampled in x
    refine = 64
    t_lo, g_lo = t[i], g[i]
    lam = (np.arange(1, refine) / refine) ** 2
    t_extra = t_star - (t_star - t_lo) * lam[::-1]
    g_extra = g_star + (g_lo - g_star) / (t_lo - t_star) * (t_extra - t_star)

    tt = np.concatenate([t[: i + 1], t_extra, [t_star]])
    gg = np.concatenate([g[: i + 1], g_extra, [g_star]])
    rr1, rr2 = preimage_radicands_xy(p.mu, p.epsilon, tt, gg)
    # on [0, t*]: r2 = r1 + c*(t - h) >= r1 whenever the graph sits below
    # the diagonal, so only gross violations can appear here
    if np.any(rr2 < -1e-9):
        raise BranchTopologyError("graph preimage leaves the cone through L2")
    s1 = np.sqrt(np.maximum(rr1, 0.0))
    s2 = np.sqrt(np.maximum(rr2, 0.0))
    xm, xp = 0.5 * (1.0 - s1), 0.5 * (1.0 + s1)
    ym = 0.5 * (1.0 - s2)
    x = np.concatenate([xm, xp[::-1]])
    y = np.concatenate([ym, ym[::-1]])
    return _symmetrized_graph(x, y, n)


def small_strength_operator(p: ParamPoint, g: LipGraph) -> LipGraph:
    """One application of the small-strength graph transform.

    The preimage of the graph splits into two curves; the lower one joins
    (0,0) to (1,0) below y = 1/2 and is returned, resampled and
    symmetrized.  Raises BranchTopologyError when the split fails, which
    signals mu above mu_1.
    """
    if p.strength_class() is not Strength.SMALL:
        raise DomainError("small-strength operator needs 0 < epsilon < 1/2")
    return _lower_preimage_graph(p, g.grid(), g.values, g.n_intervals)


def large_strength_operator(p: ParamPoint, h: LipGraph) -> LipGraph:
    """One application of the large-strength graph transform.

    The graph meets L1 in a single point (t*, h(t*)); the image is the
    union of the two lower inverse-branch pieces over [0, t*], resampled
    onto the grid.  Raises NoL1Intersection when the graph misses L1.
    """
    if p.strength_class() is not Strength.LARGE:
        raise DomainError("large-strength operator needs epsilon < 0")
    return _lower_preimage_graph(p, h.grid(), h.values, h.n_intervals)


def circle_arc_seed(n: int) -> LipGraph:
    """Lower arc of the circle x^2+y^2 = x+y as a graph over [0, 1]."""
    t = np.linspace(0.0, 1.0, n + 1)
    rad = np.maximum(0.5 - (t - 0.5) ** 2, 0.0)
    return LipGraph(0.5 - np.sqrt(rad))


@dataclass
class GammaCurve:
    """Four-piece collage of the invariant curve.

    bottom runs (0,0) -> (1,0); right, top and left are its reflections
    through the square's symmetries; assembled is the closed concatenation
    through (0,0), (1,0), (1,1), (0,1).
    """

    bottom: Polyline
    top: Polyline
    left: Polyline
    right: Polyline
    assembled: Polyline
    graph: LipGraph


@dataclass
class GammaResult:
    curve: GammaCurve
    iterations: int
    final_change: float
    converged: bool
    regime: str


def _assemble(graph: LipGraph) -> GammaCurve:
    t = graph.grid()
    g = graph.values
    bottom = np.column_stack([t, g])
    top = np.column_stack([t, 1.0 - g])
    left = np.column_stack([g, t])
    right = np.column_stack([1.0 - g, t])
    ring = np.vstack([bottom[:-1], right[:-1], top[::-1][:-1], left[::-1][:-1]])
    return GammaCurve(
        bottom=Polyline(bottom),
        top=Polyline(top),
        left=Polyline(left),
        right=Polyline(right),
        assembled=Polyline(ring, closed=True),
        graph=graph,
    )


def build_gamma(
    p: ParamPoint,
    n: int = DEFAULT_N,
    max_iters: int = DEFAULT_MAX_ITERS,
    tol: float = DEFAULT_TOL,
) -> GammaResult:
    """Iterate the strength-appropriate operator to the invariant curve.

    Small strength starts from the circle-arc seed: past the pitchfork
    locus the operator contracts and must converge (NotConverged
    otherwise); at or below it the iteration is monotone and stopping at
    max_iters is legitimate.  Large strength starts from the null function
    and is monotone as well.  Requires mu <= mu_1.
    """
    strength = p.strength_class()
    lc = loci(p.epsilon)
    if strength is Strength.OTHER:
        raise DomainError("invariant-curve construction needs small or large strength")
    if lc.mu1 is not None and p.mu > lc.mu1:
        raise DomainError(f"mu={p.mu} exceeds mu_1({p.epsilon})={lc.mu1:.6g}")

    if strength is Strength.SMALL:
        g = circle_arc_seed(n)
        op = small_strength_operator
        contracting = lc.mu0 is not None and p.mu > lc.mu0
        regime = "small-contracting" if contracting else "small-monotone"
    else:
        g = LipGraph(np.zeros(n + 1))
        op = large_strength_operator
        contracting = False
        regime = "large-monotone"

    change = math.inf
    iterations = 0
    for iterations in range(1, max_iters + 1):
        g_next = op(p, g)
        change = g.sup_distance(g_next)
        g = g_next
        if change < tol:
            break
    converged = change < tol
    if not converged and contracting:
        raise NotConverged(iterations, change, g)
    return GammaResult(_assemble(g), iterations, change, converged, regime)


# ---------------------------------------------------------------------------
# bubble-curve sequence past mu_1


def _first_l1_crossing(p: ParamPoint, pts: np.ndarray, stage: int):
    """First point along pts where the L1 radicand changes sign.

    Returns (index, crossing point).  A near-zero touch without a sign
    change ahead of the first crossing is an ordering ambiguity.
    """
    r1 = preimage_radicands_xy(p.mu, p.epsilon, pts[:, 0], pts[:, 1])[0]
    tol = TOL_GEO
    sign = np.sign(np.where(np.abs(r1) < 1e-15, 0.0, r1))
    for i in range(len(pts) - 1):
        if sign[i] > 0 and sign[i + 1] < 0:
            t = r1[i] / (r1[i] - r1[i + 1])
            return i, pts[i] + t * (pts[i + 1] - pts[i])
        if abs(r1[i]) <= tol and (i == 0 or sign[i - 1] > 0) and sign[i + 1] > 0:
            raise OrderAmbiguity(stage)
    raise BranchTopologyError(f"no L1 crossing found at stage {stage}")


def _lower_upper_preimages(p: ParamPoint, path: np.ndarray):
    """Bottom and top preimage curves of a path ending on L1.

    Bottom = (x-, y-) forward then (x+, y-) backward; top the same with
    y+.  The path must stay inside the cone except at its L1 endpoint.
    """
    r1, r2 = preimage_radicands_xy(p.mu, p.epsilon, path[:, 0], path[:, 1])
    if np.any(r1 < -1e-9) or np.any(r2 < -1e-9):
        raise BranchTopologyError("bubble path leaves the cone")
    s1 = np.sqrt(np.maximum(r1, 0.0))
    s2 = np.sqrt(np.maximum(r2, 0.0))
    xm, xp = 0.5 * (1.0 - s1), 0.5 * (1.0 + s1)
    ym, yp = 0.5 * (1.0 - s2), 0.5 * (1.0 + s2)
    bottom = np.vstack([np.column_stack([xm, ym]), np.column_stack([xp, ym])[::-1]])
    top = np.vstack([np.column_stack([xm, yp]), np.column_stack([xp, yp])[::-1]])
    return bottom, top


def build_gamma_sequence(p: ParamPoint, n: int, resample: int = 4096) -> list[Polyline]:
    """Closed curves Gamma_1..Gamma_n through the preimages of the origin.

    Stage n+1 takes the preimage of the arc running from (0,0) along the
    bottom piece to (1,0) and on along the right piece to its first L1
    crossing; reflection supplies the other half.  Every stage contains all
    four preimages of the origin.  Convergence of the sequence is reported
    by the caller, never asserted here.
    """
    if p.strength_class() is not Strength.LARGE:
        raise DomainError("the bubble sequence is a large-strength construction")
    lc = loci(p.epsilon)
    if not (lc.mu1 < p.mu < 4.0):
        raise DomainError("the bubble sequence needs mu_1 < mu < 4")
    bottom = np.array([[0.0, 0.0], [1.0, 0.0]])
    right = np.array([[1.0, 0.0], [1.0, 1.0]])
    out: list[Polyline] = []
    for stage in range(1, n + 1):
        i, q = _first_l1_crossing(p, right, stage)
        path = np.vstack([bottom, right[1 : i + 1], q[None, :]])
        path = Polyline(path).resample(resample).vertices
        new_bottom, new_top = _lower_upper_preimages(p, path)
        bottom = new_bottom
        right = new_top[:, ::-1]  # reflect x<->y; runs (1,0) -> (1,1)
        top = new_top
        left = bottom[:, ::-1]  # reflection of the bottom; runs (0,0) -> (0,1)
        ring = np.vstack([bottom[:-1], right[:-1], top[::-1][:-1], left[::-1]])
        out.append(Polyline(ring, closed=True))
    return out


def exterior_bounded_witnesses(
    p: ParamPoint,
    gamma_n: Polyline,
    search_budget: int,
    n_steps: int = 10**4,
    margin: float = 0.01,
) -> list[PlanePoint]:
    """Points outside the curve whose orbits stay bounded for n_steps.

    Candidates are preimages of the diagonal fixed point (their forward
    orbits re-enter the bounded set), kept when they lie outside the
    closed curve by more than ``margin`` and survive the escape test.
    Empty output means no witness was found at this budget.
    """
    if p.strength_class() is not Strength.LARGE:
        raise DomainError("witness search is a large-strength construction")
    if search_budget <= 0:
        return []
    from .preimage import preimage_tree

    x_star = (p.mu - 1.0) / p.mu
    tree = preimage_tree(p, (x_star, x_star), depth=48, point_budget=search_budget)
    pts = tree.all_points()
    if len(pts) == 0:
        return []
    # preimages accumulate heavily; a coarse dedup (keeping original
    # representatives) keeps the geometry tests cheap
    keys = np.round(pts / (0.25 * margin)).astype(np.int64)
    _, first = np.unique(keys, axis=0, return_index=True)
    pts = pts[first]
    poly = gamma_n if len(gamma_n) <= 4096 else gamma_n.resample(4096)
    outside = ~point_in_polygon(pts, poly.vertices)
    pts = pts[outside]
    if len(pts) == 0:
        return []
    dist = points_to_polyline_distance(pts, gamma_n)
    pts = pts[dist > margin]
    if len(pts) == 0:
        return []
    esc = _kernels.bounded_mask(p.mu, p.epsilon, np.ascontiguousarray(pts), n_steps, 1)
    return [PlanePoint(x, y) for x, y in pts[esc == -1]]
