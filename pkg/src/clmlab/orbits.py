"""Forward dynamics: iteration with escape detection, synchronization
measurement, attractor sampling with period and area estimation, diagonal
Cantor-set membership, and quadrant itineraries.

Escape regions depend on the coupling strength: large strength uses the unit
square, everything else the closed disk bounded by x^2+y^2 = x+y.  Both
regions have their exterior inside the basin of infinity, so the escape flag
is one-sided: an Escaped verdict is certain, BoundedSoFar only means "not
yet escaped".
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from . import _kernels
from .core import ParamPoint, PlanePoint, Strength, TOL_GEO, as_point, map_eval_xy
from .errors import AmbiguousComponent, DomainError, EmptyWindow, NotBounded

__all__ = [
    "Escaped",
    "BoundedSoFar",
    "OrbitResult",
    "SyncReport",
    "AttractorEstimate",
    "Itinerary",
    "escape_mode",
    "iterate_forward",
    "synchronization_verdict",
    "estimate_attractor",
    "diagonal_cantor_member",
    "quadrant_itinerary",
    "MAX_SAMPLES",
    "PERIOD_CAP",
    "FAT_MIN_CELLS",
]

MAX_SAMPLES = 10**6  # orbit results are decimated to at most this many points
PERIOD_CAP = 64  # larger periods are reported as absent
CELL_OVERLAP_SLACK = 0.02
CYCLE_HIT_RATE = 0.98
FAT_MIN_CELLS = 10  # heuristic floor below which a set is never called fat
_TAIL_CAP = 1 << 19  # post-transient iterates kept for period detection


@dataclass(frozen=True)
class Escaped:
    step: int


@dataclass(frozen=True)
class BoundedSoFar:
    steps: int


@dataclass
class OrbitResult:
    samples: np.ndarray
    verdict: Escaped | BoundedSoFar
    sync_gap: np.ndarray
    stride: int

    @property
    def escaped(self) -> bool:
        return isinstance(self.verdict, Escaped)


@dataclass(frozen=True)
class SyncReport:
    synchronized: bool
    final_gap: float


def escape_mode(p: ParamPoint) -> int:
    """Kernel escape mode: 1 (unit square) for large strength, else 0 (disk)."""
    return 1 if p.strength_class() is Strength.LARGE else 0


def iterate_forward(p: ParamPoint, z0, n_max: int) -> OrbitResult:
    """Iterate z0 until n_max or escape, capturing a decimated sample trail.

    The verdict's step is the first iterate strictly outside the escape
    region (step 0 when z0 itself is outside).
    """
    if n_max < 0:
        raise DomainError("n_max must be nonnegative")
    z0 = as_point(z0)
    stride = max(1, -(-(n_max + 1) // MAX_SAMPLES))
    samples, gaps, _, esc = _kernels.iterate_capture(
        p.mu, p.epsilon, z0.x, z0.y, n_max, stride, escape_mode(p)
    )
    verdict = Escaped(esc) if esc >= 0 else BoundedSoFar(n_max)
    return OrbitResult(samples, verdict, gaps, stride)


def synchronization_verdict(
    p: ParamPoint, z0, n_max: int, tol: float = 1e-8
) -> SyncReport:
    """True iff the trailing 10% of sampled gaps |x-y| all fall below tol.

    Raises NotBounded when the orbit escapes within n_max steps.
    """
    res = iterate_forward(p, z0, n_max)
    if res.escaped:
        raise NotBounded(res.verdict.step)
    tail = res.sync_gap[-max(1, len(res.sync_gap) // 10) :]
    return SyncReport(bool(np.all(tail < tol)), float(res.sync_gap[-1]))


@dataclass
class AttractorEstimate:
    """Raster evidence for an attracting set sampled from one long orbit."""

    occupied: np.ndarray
    window: tuple[float, float, float, float]
    resolution: tuple[int, int]
    period: int | None
    area_estimate: float
    transient_discarded: int
    final_state: tuple[float, float]

    @property
    def occupied_cells(self) -> int:
        return int(self.occupied.sum())

    @property
    def is_fat(self) -> bool:
        # heuristic: thin sets and short orbits are never labelled fat
        return self.occupied_cells >= FAT_MIN_CELLS

    def cell_area(self) -> float:
        xmin, xmax, ymin, ymax = self.window
        w, h = self.resolution
        return (xmax - xmin) / w * (ymax - ymin) / h


def _coset_sets(tail: np.ndarray, period: int, n_cells: int):
    """Occupied-cell sets of the subsampled orbits tail[r::period]."""
    sets = []
    for r in range(period):
        ids = tail[r::period]
        ids = ids[ids >= 0]
        mask = np.zeros(n_cells, dtype=bool)
        mask[ids] = True
        sets.append(mask)
    return sets


def _cosets_disjoint(sets) -> bool:
    sizes = [int(m.sum()) for m in sets]
    if min(sizes) == 0:
        return False
    claimed = np.zeros(len(sets[0]), dtype=np.int16)
    for m in sets:
        claimed[m] += 1
    conflicts = int((claimed > 1).sum())
    return conflicts <= CELL_OVERLAP_SLACK * min(sizes)


def _cycle_consistent(p: ParamPoint, sets, window, resolution) -> bool:
    """Each coset's cell centers must map into the next coset (1-cell slack)."""
    xmin, xmax, ymin, ymax = window
    w, h = resolution
    dx, dy = (xmax - xmin) / w, (ymax - ymin) / h
    n = len(sets)
    for r in range(n):
        ii, jj = np.nonzero(sets[r].reshape(h, w))
        cx = xmin + (jj + 0.5) * dx
        cy = ymin + (ii + 0.5) * dy
        nx, ny = map_eval_xy(p.mu, p.epsilon, cx, cy)
        tj = np.floor((nx - xmin) / dx).astype(np.int64)
        ti = np.floor((ny - ymin) / dy).astype(np.int64)
        target = ndimage.binary_dilation(
            sets[(r + 1) % n].reshape(h, w), structure=np.ones((3, 3), bool)
        )
        ok = (0 <= tj) & (tj < w) & (0 <= ti) & (ti < h)
        hits = target[ti[ok], tj[ok]].sum()
        if hits < CYCLE_HIT_RATE * len(cx):
            return False
    return True


def _detect_period(p: ParamPoint, tail, window, resolution) -> int | None:
    w, h = resolution
    for period in range(PERIOD_CAP, 0, -1):
        sets = _coset_sets(tail, period, w * h)
        if not _cosets_disjoint(sets):
            continue
        if _cycle_consistent(p, sets, window, resolution):
            return period
    return None


def estimate_attractor(
    p: ParamPoint,
    z0,
    n_total: int = 10**7,
    n_transient: int = 10**4,
    window: tuple[float, float, float, float] = (0.0, 1.0, 0.0, 1.0),
    resolution: int | tuple[int, int] = 512,
) -> AttractorEstimate:
    """Rasterize iterates n_transient..n_total and estimate period and area.

    The period test splits the orbit tail by index mod p (p up to
    PERIOD_CAP): the per-residue cell sets must be pairwise disjoint up to
    2% overlap and each must map into the next.  The largest p passing both
    is reported; none passing reports period=None.
    """
    if n_total <= n_transient:
        raise DomainError("n_total must exceed n_transient")
    z0 = as_point(z0)
    w, h = (resolution, resolution) if isinstance(resolution, int) else resolution
    xmin, xmax, ymin, ymax = window
    occupied, tail, hits, esc, fx, fy = _kernels.accumulate_orbit(
        p.mu, p.epsilon, z0.x, z0.y, n_total, n_transient,
        xmin, xmax, ymin, ymax, w, h, _TAIL_CAP, escape_mode(p),
    )
    if esc >= 0:
        raise NotBounded(esc)
    if hits == 0:
        raise EmptyWindow("no post-transient iterate landed in the window")
    period = _detect_period(p, tail, window, (w, h))
    cell_area = (xmax - xmin) / w * (ymax - ymin) / h
    return AttractorEstimate(
        occupied=occupied.astype(bool),
        window=window,
        resolution=(w, h),
        period=period,
        area_estimate=float(occupied.sum()) * cell_area,
        transient_discarded=n_transient,
        final_state=(fx, fy),
    )


def diagonal_cantor_member(p: ParamPoint, x: float, n_max: int) -> bool:
    """Numerical surrogate for membership in the diagonal Cantor set.

    True iff the logistic orbit of x stays in [0, 1] for n_max steps.
    Requires mu > 4 (below that the whole interval is trapped).
    """
    if p.mu <= 4.0:
        raise DomainError("diagonal Cantor membership needs mu > 4")
    t = float(x)
    for _ in range(n_max):
        if t < 0.0 or t > 1.0:
            return False
        t = p.mu * t * (1.0 - t)
    return 0.0 <= t <= 1.0


@dataclass
class Itinerary:
    """Quadrant symbols of the iterates that stayed inside the unit square."""

    symbols: np.ndarray
    escaped: bool

    def __len__(self) -> int:
        return len(self.symbols)


def quadrant_itinerary(p: ParamPoint, z0, n: int, tol: float = TOL_GEO) -> Itinerary:
    """Symbol sequence over the four inverse-branch components of the square.

    Component index is by branch signs: 2*(x > 1/2) + (y > 1/2), i.e. the
    quadrant around the critical point (1/2, 1/2).  Marching stops with an
    escaped itinerary at the first iterate outside the square.  An iterate
    within ``tol`` of a component boundary raises AmbiguousComponent.
    """
    if p.strength_class() is not Strength.LARGE or p.mu <= 4.0:
        raise DomainError("itineraries are defined for large strength with mu > 4")
    z0 = as_point(z0)
    x, y = z0.x, z0.y
    symbols = np.empty(n + 1, dtype=np.int8)
    for k in range(n + 1):
        if x < 0.0 or x > 1.0 or y < 0.0 or y > 1.0:
            return Itinerary(symbols[:k], escaped=True)
        if abs(x - 0.5) <= tol or abs(y - 0.5) <= tol:
            raise AmbiguousComponent(k)
        symbols[k] = 2 * (x > 0.5) + (y > 0.5)
        x, y = map_eval_xy(p.mu, p.epsilon, x, y)
    return Itinerary(symbols, escaped=False)
