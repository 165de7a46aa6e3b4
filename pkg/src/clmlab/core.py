"""Coupled logistic map: evaluation, Jacobian, inverse branches, fixed points
and the parameter/phase-plane geometry everything else is built on.

The map is F(x, y) = ((1-eps)*f(x) + eps*f(y), (1-eps)*f(y) + eps*f(x)) with
f(t) = mu*t*(1-t).  Two coupling regimes are distinguished: small strength
(0 < eps < 1/2) and large strength (eps < 0).  The image of the plane is a
cone bounded by the two critical-value rays; points outside it have no
preimages, interior points have four, given in closed form by the inverse
branches ``x_pm`` / ``y_pm`` below.

Every function here is pure; array-level helpers (suffix ``_xy``) operate on
numpy arrays so the engines can vectorize over many points at once.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

__all__ = [
    "TOL_ROUND",
    "TOL_FIX",
    "TOL_GEO",
    "TOL_EIG",
    "Strength",
    "ParamPoint",
    "PlanePoint",
    "Classification",
    "FixedPointLabel",
    "FixedPointInfo",
    "Ray",
    "PlaneGeometry",
    "ConeLocation",
    "logistic",
    "logistic_prime",
    "map_eval",
    "map_eval_xy",
    "jacobian",
    "fixed_points",
    "LociValues",
    "loci",
    "plane_geometry",
    "cone_membership",
    "preimages",
    "preimage_radicands_xy",
    "preimage_branches_xy",
    "as_point",
]

# Numerical contracts (double precision with ~1e3 condition headroom):
# round-trip identities, fixed-point residuals, boundary classification,
# and hyperbolicity bands respectively.
TOL_ROUND = 1e-12
TOL_FIX = 1e-12
TOL_GEO = 1e-10
TOL_EIG = 1e-8


class Strength(enum.Enum):
    SMALL = "small"
    LARGE = "large"
    OTHER = "other"


@dataclass(frozen=True)
class ParamPoint:
    """Parameter pair (mu, eps).

    eps in {0, 1/2, 1} is rejected: the inverse branches divide by 1-2*eps
    and the critical-value rays divide by eps and 1-eps.
    """

    mu: float
    epsilon: float

    def __post_init__(self):
        if not (math.isfinite(self.mu) and math.isfinite(self.epsilon)):
            raise ValueError("mu and epsilon must be finite")
        if self.mu <= 0:
            raise ValueError(f"mu must be positive, got {self.mu}")
        if self.epsilon in (0.0, 0.5, 1.0):
            raise ValueError(
                f"epsilon={self.epsilon} is degenerate (0, 1/2 and 1 are excluded)"
            )

    def strength_class(self) -> Strength:
        if 0.0 < self.epsilon < 0.5:
            return Strength.SMALL
        if self.epsilon < 0.0:
            return Strength.LARGE
        return Strength.OTHER


@dataclass(frozen=True)
class PlanePoint:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError("plane points must have finite coordinates")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y], dtype=float)

    def reflected(self) -> "PlanePoint":
        return PlanePoint(self.y, self.x)


def as_point(z) -> PlanePoint:
    """Coerce a PlanePoint, pair, or length-2 array to a PlanePoint."""
    if isinstance(z, PlanePoint):
        return z
    x, y = z
    return PlanePoint(float(x), float(y))


class Classification(enum.Enum):
    REPELLER = "repeller"
    SADDLE = "saddle"
    ATTRACTOR = "attractor"
    NON_HYPERBOLIC = "non-hyperbolic"


class FixedPointLabel(enum.Enum):
    O = "O"
    P_MU = "P_mu"
    P_MU_EPS = "p_mu_eps"
    R_P_MU_EPS = "R(p_mu_eps)"


@dataclass(frozen=True)
class FixedPointInfo:
    location: PlanePoint
    eigenvalues: tuple[complex, complex]
    classification: Classification
    label: FixedPointLabel


# ---------------------------------------------------------------------------
# map evaluation


def logistic(t: float, mu: float) -> float:
    """mu * t * (1 - t)."""
    return mu * t * (1.0 - t)


def logistic_prime(t: float, mu: float) -> float:
    """mu * (1 - 2t)."""
    return mu * (1.0 - 2.0 * t)


def map_eval_xy(mu: float, eps: float, x, y):
    """Vectorized map evaluation on raw coordinates.

    Returns (x', y').  On the diagonal x == y the two outputs are computed
    from identical float expressions, so diagonal invariance holds exactly.
    """
    fx = mu * x * (1.0 - x)
    fy = mu * y * (1.0 - y)
    return (1.0 - eps) * fx + eps * fy, (1.0 - eps) * fy + eps * fx


def map_eval(p: ParamPoint, z) -> PlanePoint:
    z = as_point(z)
    xn, yn = map_eval_xy(p.mu, p.epsilon, z.x, z.y)
    return PlanePoint(xn, yn)


def jacobian(p: ParamPoint, z) -> np.ndarray:
    """Jacobian matrix; singular exactly on the critical lines x=1/2, y=1/2."""
    z = as_point(z)
    dfx = logistic_prime(z.x, p.mu)
    dfy = logistic_prime(z.y, p.mu)
    e = p.epsilon
    return np.array([[(1.0 - e) * dfx, e * dfy], [e * dfx, (1.0 - e) * dfy]])


def eig2(m: np.ndarray) -> tuple[complex, complex]:
    """Eigenvalues of a real 2x2 matrix in closed form."""
    tr = m[0, 0] + m[1, 1]
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    disc = tr * tr - 4.0 * det
    if disc >= 0.0:
        s = math.sqrt(disc)
        return ((tr + s) / 2.0 + 0.0j, (tr - s) / 2.0 + 0.0j)
    s = math.sqrt(-disc)
    return (complex(tr / 2.0, s / 2.0), complex(tr / 2.0, -s / 2.0))


def classify_eigenvalues(
    ev: tuple[complex, complex], tol: float = TOL_EIG
) -> Classification:
    m0, m1 = abs(ev[0]), abs(ev[1])
    if abs(m0 - 1.0) <= tol or abs(m1 - 1.0) <= tol:
        return Classification.NON_HYPERBOLIC
    inside = (m0 < 1.0) + (m1 < 1.0)
    if inside == 2:
        return Classification.ATTRACTOR
    if inside == 0:
        return Classification.REPELLER
    return Classification.SADDLE


# ---------------------------------------------------------------------------
# fixed points


def _diagonal_fixed_point(p: ParamPoint, x: float, label: FixedPointLabel) -> FixedPointInfo:
    # On the diagonal the eigenvectors are the diagonal and antidiagonal,
    # with eigenvalues f'(x) and (1-2*eps)*f'(x).
    d = logistic_prime(x, p.mu)
    ev = (complex(d), complex((1.0 - 2.0 * p.epsilon) * d))
    return FixedPointInfo(PlanePoint(x, x), ev, classify_eigenvalues(ev), label)


def offdiagonal_pair_coordinates(p: ParamPoint) -> tuple[float, float] | None:
    """Coordinates (p_minus, p_plus) of the off-diagonal fixed point, if it exists.

    The pair lives on the line x + y = k with k = 1 - 1/(mu*(1-2*eps)) and
    exists iff the discriminant 2*(mu-1)*mu*k - mu^2*k^2 is nonnegative.
    """
    mu, e = p.mu, p.epsilon
    k = 1.0 - 1.0 / (mu * (1.0 - 2.0 * e))
    disc = 2.0 * (mu - 1.0) * mu * k - mu * mu * k * k
    if disc < 0.0:
        return None
    s = math.sqrt(disc)
    return ((k * mu - s) / (2.0 * mu), (k * mu + s) / (2.0 * mu))


def fixed_points(p: ParamPoint) -> list[FixedPointInfo]:
    """All fixed points with closed-form eigenvalues and classification.

    Always contains O=(0,0) and P_mu=((mu-1)/mu, (mu-1)/mu).  The
    off-diagonal pair p=(p-, p+) and its reflection are present iff the
    pitchfork has occurred (mu past mu0 for small strength, mu0' for large).
    """
    out = [
        _diagonal_fixed_point(p, 0.0, FixedPointLabel.O),
        _diagonal_fixed_point(p, (p.mu - 1.0) / p.mu, FixedPointLabel.P_MU),
    ]
    pair = offdiagonal_pair_coordinates(p)
    if pair is not None:
        for loc, label in (
            (PlanePoint(pair[0], pair[1]), FixedPointLabel.P_MU_EPS),
            (PlanePoint(pair[1], pair[0]), FixedPointLabel.R_P_MU_EPS),
        ):
            ev = eig2(jacobian(p, loc))
            out.append(FixedPointInfo(loc, ev, classify_eigenvalues(ev), label))
    return out


# ---------------------------------------------------------------------------
# parameter-space loci


@dataclass(frozen=True)
class LociValues:
    """Values of the five parameter-space curves at one eps; None = outside domain."""

    mu0: float | None
    mu1: float | None
    mu_prime: float | None
    mu0_prime: float | None
    mu2: float | None


def loci(epsilon: float) -> LociValues:
    """Evaluate the locus curves at eps, honoring each curve's domain.

    mu0 = 1/(1-2e) and mu_prime = 1 + sqrt((3-2e)/(1-2e)) belong to small
    strength (mu_prime only up to e = 3/8); mu0' = (1-4e)/(1-2e) and
    mu2 = (3-4e)/(1-2e) to large strength; mu1 = 4(1-e)/(1-2e) to both.
    """
    if epsilon == 0.5:
        raise DomainError("loci undefined at epsilon=1/2")
    small = 0.0 < epsilon < 0.5
    large = epsilon < 0.0
    one_m2e = 1.0 - 2.0 * epsilon
    return LociValues(
        mu0=1.0 / one_m2e if small else None,
        mu1=4.0 * (1.0 - epsilon) / one_m2e if (small or large) else None,
        mu_prime=(
            1.0 + math.sqrt((3.0 - 2.0 * epsilon) / one_m2e)
            if 0.0 < epsilon <= 0.375
            else None
        ),
        mu0_prime=(1.0 - 4.0 * epsilon) / one_m2e if large else None,
        mu2=(3.0 - 4.0 * epsilon) / one_m2e if large else None,
    )


# ---------------------------------------------------------------------------
# phase-plane geometry


@dataclass(frozen=True)
class Ray:
    """Half-line y = slope*x + intercept from x_vertex in one x direction.

    direction -1 runs toward smaller x (small strength), +1 toward larger x
    (large strength, where the image of a critical line opens the other
    way).
    """

    slope: float
    intercept: float
    x_vertex: float
    direction: int

    def y_at(self, x):
        return self.slope * x + self.intercept

    def contains_x(self, x) -> bool | np.ndarray:
        if self.direction < 0:
            return x <= self.x_vertex
        return x >= self.x_vertex


@dataclass(frozen=True)
class PlaneGeometry:
    """Critical lines, critical-value rays, and the reference curves.

    l1/l2 are the critical lines x=1/2 and y=1/2.  L1/L2 are their images,
    two rays meeting at the cone vertex (mu/4, mu/4).  circle x^2+y^2=x+y
    bounds the generic escape disk; the unit square bounds the large-strength
    one.  q_intercept is where L1 meets the x-axis.
    """

    l1_x: float
    l2_y: float
    L1: Ray
    L2: Ray
    cone_vertex: PlanePoint
    circle_center: PlanePoint
    circle_radius: float
    square: tuple[float, float, float, float]
    q_intercept: float


def plane_geometry(p: ParamPoint) -> PlaneGeometry:
    mu, e = p.mu, p.epsilon
    # x along F(l1) is (1-e)*mu/4 + e*f(t) with f(t) unbounded below, so the
    # ray runs leftward from the vertex when e > 0 and rightward when e < 0;
    # along F(l2) the roles of e and 1-e swap
    return PlaneGeometry(
        l1_x=0.5,
        l2_y=0.5,
        L1=Ray(
            (1.0 - e) / e,
            -(1.0 - 2.0 * e) * mu / (4.0 * e),
            mu / 4.0,
            -1 if e > 0 else 1,
        ),
        L2=Ray(
            e / (1.0 - e),
            (1.0 - 2.0 * e) * mu / (4.0 * (1.0 - e)),
            mu / 4.0,
            -1 if e < 1 else 1,
        ),
        cone_vertex=PlanePoint(mu / 4.0, mu / 4.0),
        circle_center=PlanePoint(0.5, 0.5),
        circle_radius=math.sqrt(0.5),
        square=(0.0, 1.0, 0.0, 1.0),
        q_intercept=(1.0 - 2.0 * e) * mu / (4.0 * (1.0 - e)),
    )


# ---------------------------------------------------------------------------
# inverse branches


def preimage_radicands_xy(mu: float, eps: float, zx, zy):
    """Radicands of the two inverse-branch square roots at (zx, zy).

    r1 belongs to the x branches and vanishes exactly on the ray L1;
    r2 to the y branches and vanishes on L2.  Both are affine in (zx, zy);
    the point is in the image cone iff both are >= 0.
    """
    c = 4.0 / (mu * (1.0 - 2.0 * eps))
    r1 = 1.0 + c * (eps * zy - (1.0 - eps) * zx)
    r2 = 1.0 + c * (eps * zx - (1.0 - eps) * zy)
    return r1, r2


def _radicand_gradients(mu: float, eps: float) -> tuple[float, float]:
    # |grad r| converts a geometric tolerance into a radicand tolerance.
    c = 4.0 / abs(mu * (1.0 - 2.0 * eps))
    g = c * math.hypot(1.0 - eps, eps)
    return g, g


def preimage_branches_xy(mu: float, eps: float, zx, zy):
    """Branch coordinates (x-, x+, y-, y+) where radicands permit, else nan."""
    r1, r2 = preimage_radicands_xy(mu, eps, zx, zy)
    s1 = np.sqrt(np.where(r1 >= 0.0, r1, np.nan))
    s2 = np.sqrt(np.where(r2 >= 0.0, r2, np.nan))
    return (
        0.5 * (1.0 - s1),
        0.5 * (1.0 + s1),
        0.5 * (1.0 - s2),
        0.5 * (1.0 + s2),
    )


class ConeLocation(enum.Enum):
    INTERIOR = "interior"
    ON_L1 = "on_L1"
    ON_L2 = "on_L2"
    VERTEX = "vertex"
    OUTSIDE = "outside"


def cone_membership(p: ParamPoint, z, tol: float = TOL_GEO) -> ConeLocation:
    """Classify z against the image cone with boundary tolerance ``tol``.

    The test uses the inverse-branch radicands, scaled so that ``tol`` is a
    geometric distance from the rays.
    """
    z = as_point(z)
    r1, r2 = preimage_radicands_xy(p.mu, p.epsilon, z.x, z.y)
    g1, g2 = _radicand_gradients(p.mu, p.epsilon)
    t1, t2 = tol * g1, tol * g2
    on1, on2 = abs(r1) <= t1, abs(r2) <= t2
    if on1 and on2:
        return ConeLocation.VERTEX
    if r1 < -t1 or r2 < -t2:
        return ConeLocation.OUTSIDE
    if on1:
        return ConeLocation.ON_L1
    if on2:
        return ConeLocation.ON_L2
    return ConeLocation.INTERIOR


def preimages(p: ParamPoint, z, merge_tol: float = TOL_GEO) -> list[PlanePoint]:
    """All preimages of z: 4 for cone-interior points, 2 on a ray, 0 outside.

    Points within ``merge_tol`` (geometric distance) of a ray have their
    branch pair merged, so ray points do not report spurious 4-counts; at
    the cone vertex all four coincide and a single point is returned.  For
    cone-interior points every returned w satisfies ||F(w) - z|| <=
    TOL_ROUND exactly; merged boundary representatives answer for the
    nearest ray point, with an O(merge_tol) round-trip error.  Ordering is
    by branch signs (-,-), (-,+), (+,-), (+,+); no further geometric
    meaning.
    """
    z = as_point(z)
    r1, r2 = preimage_radicands_xy(p.mu, p.epsilon, z.x, z.y)
    g1, g2 = _radicand_gradients(p.mu, p.epsilon)
    t1, t2 = merge_tol * g1, merge_tol * g2
    if r1 < -t1 or r2 < -t2:
        return []
    if r1 <= t1:
        xs = [0.5]
    else:
        s1 = math.sqrt(r1)
        xs = [0.5 * (1.0 - s1), 0.5 * (1.0 + s1)]
    if r2 <= t2:
        ys = [0.5]
    else:
        s2 = math.sqrt(r2)
        ys = [0.5 * (1.0 - s2), 0.5 * (1.0 + s2)]
    return [PlanePoint(x, y) for x in xs for y in ys]
