"""Periodic-orbit continuation and bifurcation detection.

Orbits solve F^p(z) = z by damped Newton with the chain-rule Jacobian; the
cycle eigenvalues come from the product of the step Jacobians around the
cycle.  Hopf bracketing continues an orbit in mu, watches the modulus of
the complex eigenvalue pair, and bisects the modulus-1 crossing.  Losing
the orbit during bisection counts as the upper side of the bracket, not an
error.  The pitchfork check verifies both the existence flip of the
off-diagonal pair at its locus and the square-root scaling of the branch.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import (
    ParamPoint,
    PlanePoint,
    TOL_FIX,
    as_point,
    eig2,
    jacobian,
    loci,
    map_eval_xy,
    offdiagonal_pair_coordinates,
)
from .errors import (
    ConvergedToLowerPeriod,
    DomainError,
    NoComplexPair,
    NoConvergence,
    OrbitLost,
)
from .rasters import Raster

__all__ = [
    "PeriodicOrbit",
    "HopfBracket",
    "ContinuationStep",
    "PitchforkReport",
    "find_periodic_orbit",
    "hopf_bracket",
    "pitchfork_check",
    "loci_diagram",
]

_NEWTON_MAX_ITER = 100
_DAMPING = 0.5


@dataclass
class PeriodicOrbit:
    """A period-p orbit with the eigenvalues of its cycle Jacobian."""

    points: np.ndarray
    period: int
    cycle_eigenvalues: tuple[complex, complex]
    residual: float

    def moduli(self) -> tuple[float, float]:
        return (abs(self.cycle_eigenvalues[0]), abs(self.cycle_eigenvalues[1]))


def _orbit_and_jacobian(p: ParamPoint, z: np.ndarray, period: int):
    """Points z, F(z), ..., F^{p-1}(z) and the cycle Jacobian product."""
    pts = np.empty((period, 2))
    m = np.eye(2)
    x, y = z
    for i in range(period):
        pts[i] = (x, y)
        m = jacobian(p, (x, y)) @ m
        x, y = map_eval_xy(p.mu, p.epsilon, x, y)
    return pts, np.array([x, y]), m


def find_periodic_orbit(
    p: ParamPoint,
    period: int,
    guess,
    max_iter: int = _NEWTON_MAX_ITER,
    tol: float = TOL_FIX,
) -> PeriodicOrbit:
    """Newton solve of F^p(z) = z from a guess, rejecting lower periods.

    Damping halves the step while the residual grows.  The returned orbit
    satisfies max_i ||F(z_i) - z_{i+1}|| <= tol, and no proper divisor q of
    p has F^q(z_0) = z_0 within tol (ConvergedToLowerPeriod otherwise).
    """
    if period < 1:
        raise DomainError("period must be at least 1")
    z = as_point(guess).as_array()
    res = math.inf
    for _ in range(max_iter):
        pts, fz, m = _orbit_and_jacobian(p, z, period)
        g = fz - z
        res = float(np.hypot(*g))
        if res <= tol:
            break
        jg = m - np.eye(2)
        try:
            step = np.linalg.solve(jg, -g)
        except np.linalg.LinAlgError:
            raise NoConvergence(max_iter, res)
        # damp while the residual increases
        lam = 1.0
        for _ in range(20):
            z_try = z + lam * step
            _, fz_try, _ = _orbit_and_jacobian(p, z_try, period)
            if np.hypot(*(fz_try - z_try)) < res:
                break
            lam *= _DAMPING
        z = z + lam * step
    else:
        raise NoConvergence(max_iter, res)

    pts, _, m = _orbit_and_jacobian(p, z, period)
    for q in range(1, period):
        if period % q == 0:
            _, fq, _ = _orbit_and_jacobian(p, z, q)
            if np.hypot(*(fq - z)) <= tol:
                raise ConvergedToLowerPeriod(q)
    nxt = np.roll(pts, -1, axis=0)
    mapped = np.column_stack(map_eval_xy(p.mu, p.epsilon, pts[:, 0], pts[:, 1]))
    residual = float(np.hypot(*(mapped - nxt).T).max())
    return PeriodicOrbit(pts, period, eig2(m), residual)


@dataclass
class ContinuationStep:
    mu: float
    orbit: PeriodicOrbit
    complex_pair: bool
    modulus: float


@dataclass
class HopfBracket:
    """Modulus-1 crossing bracket of the complex eigenvalue pair.

    At mu_lo the pair has modulus < 1; at mu_hi either modulus > 1 or the
    orbit was lost (a legitimate right-bracket event).  ``refined`` is
    False when the requested width was no smaller than the search range.
    """

    epsilon: float
    mu_lo: float
    mu_hi: float
    orbit_at_lo: PeriodicOrbit
    modulus_lo: float
    modulus_hi: float
    refined: bool
    orbit_lost_at_hi: bool = False
    trace: list[ContinuationStep] = field(default_factory=list)


def _solve_step(epsilon: float, mu: float, period: int, guess) -> ContinuationStep:
    orbit = find_periodic_orbit(ParamPoint(mu, epsilon), period, guess)
    ev = orbit.cycle_eigenvalues
    complex_pair = abs(ev[0].imag) > 0.0
    return ContinuationStep(mu, orbit, complex_pair, abs(ev[0]))


def hopf_bracket(
    epsilon: float,
    period: int,
    mu_start: float,
    mu_end: float,
    width: float,
    seed_guess,
    coarse_steps: int = 40,
) -> HopfBracket:
    """Bracket the modulus-1 crossing of a continued orbit's complex pair.

    The orbit is continued from mu_start with the previous solution as
    predictor; the first coarse interval where the modulus crosses 1 (or
    the orbit disappears) is bisected down to ``width``.
    """
    if mu_start >= mu_end:
        raise DomainError("mu_start must be below mu_end")
    span = mu_end - mu_start
    if width >= span:
        # degenerate request: nothing to bisect
        first = _solve_step(epsilon, mu_start, period, seed_guess)
        return HopfBracket(
            epsilon, mu_start, mu_end, first.orbit, first.modulus, math.nan,
            refined=False, trace=[first],
        )

    trace: list[ContinuationStep] = []
    mus = np.linspace(mu_start, mu_end, coarse_steps + 1)
    guess = as_point(seed_guess).as_array()
    below: ContinuationStep | None = None
    above: ContinuationStep | None = None
    lost_at: float | None = None
    for mu in mus:
        try:
            step = _solve_step(epsilon, float(mu), period, guess)
        except (NoConvergence, ConvergedToLowerPeriod):
            if below is None:
                raise OrbitLost(float(mu))
            lost_at = float(mu)
            break
        trace.append(step)
        guess = step.orbit.points[0]
        if step.complex_pair and step.modulus < 1.0:
            below = step
        if below is not None and step.complex_pair and step.modulus > 1.0:
            above = step
            break
    if below is None:
        raise NoComplexPair("no complex pair with modulus below 1 in the range")
    if above is None and lost_at is None:
        raise OrbitLost(mu_end)

    lo, lo_step = below.mu, below
    hi = above.mu if above is not None else lost_at
    hi_modulus = above.modulus if above is not None else math.inf
    lost = above is None
    while hi - lo > width:
        mid = 0.5 * (lo + hi)
        try:
            step = _solve_step(epsilon, mid, period, lo_step.orbit.points[0])
        except (NoConvergence, ConvergedToLowerPeriod):
            hi, hi_modulus, lost = mid, math.inf, True
            continue
        trace.append(step)
        if step.complex_pair and step.modulus < 1.0:
            lo, lo_step = mid, step
        else:
            hi, hi_modulus, lost = mid, step.modulus, False
    return HopfBracket(
        epsilon, lo, hi, lo_step.orbit, lo_step.modulus, hi_modulus,
        refined=True, orbit_lost_at_hi=lost, trace=trace,
    )


@dataclass
class PitchforkReport:
    """Numerical verification of the off-diagonal pitchfork at its locus."""

    epsilon: float
    locus: float
    flip_mu: float
    flip_error: float
    scaling_exponent: float
    samples: list[tuple[float, float]]
    passed: bool


def _pair_distance(epsilon: float, mu: float) -> float | None:
    """Distance from the off-diagonal pair to its bifurcating fixed point."""
    p = ParamPoint(mu, epsilon)
    pair = offdiagonal_pair_coordinates(p)
    if pair is None:
        return None
    if epsilon < 0:
        ref = (mu - 1.0) / mu  # pitchfork at P_mu
        return math.hypot(pair[0] - ref, pair[1] - ref)
    return math.hypot(pair[0], pair[1])  # pitchfork at O


def pitchfork_check(epsilon: float, n_samples: int = 12) -> PitchforkReport:
    """Verify the existence flip at the locus and the sqrt branch scaling.

    The flip is bisected to 1e-8 against the closed-form locus; the branch
    distance is fit over mu = locus + delta for a log-spaced delta ladder,
    expecting exponent 0.5 +- 0.1.
    """
    lc = loci(epsilon)
    locus = lc.mu0 if epsilon > 0 else lc.mu0_prime
    if locus is None:
        raise DomainError("pitchfork locus undefined at this epsilon")
    lo, hi = max(1.0 + 1e-9, locus - 0.5), locus + 0.5
    if _pair_distance(epsilon, lo) is not None or _pair_distance(epsilon, hi) is None:
        raise DomainError("existence flip is not bracketed near the locus")
    while hi - lo > 1e-12:
        mid = 0.5 * (lo + hi)
        if _pair_distance(epsilon, mid) is None:
            lo = mid
        else:
            hi = mid
    flip_mu = 0.5 * (lo + hi)
    flip_error = abs(flip_mu - locus)

    deltas = np.logspace(-6, -2, n_samples)
    samples = []
    for d in deltas:
        dist = _pair_distance(epsilon, locus + d)
        if dist is not None and dist > 0:
            samples.append((float(d), float(dist)))
    ld = np.log([s[0] for s in samples])
    lv = np.log([s[1] for s in samples])
    exponent = float(np.polyfit(ld, lv, 1)[0])
    passed = flip_error <= 1e-8 and abs(exponent - 0.5) <= 0.1
    return PitchforkReport(
        epsilon, locus, flip_mu, flip_error, exponent, samples, passed
    )


_CURVE_BITS = {"mu0": 1, "mu1": 2, "mu_prime": 4, "mu0_prime": 8, "mu2": 16}


def loci_diagram(
    eps_range: tuple[float, float],
    mu_range: tuple[float, float],
    resolution: int | tuple[int, int] = 512,
) -> Raster:
    """Parameter-plane raster with the five locus curves as bitmask overlays.

    Cell value bits follow _CURVE_BITS; empty ranges yield an all-zero
    raster.  The window is (eps_lo, eps_hi, mu_lo, mu_hi).
    """
    w, h = (resolution, resolution) if isinstance(resolution, int) else tuple(resolution)
    e0, e1 = eps_range
    m0, m1 = mu_range
    cells = np.zeros((h, w), dtype=np.int32)
    degenerate = not (e1 > e0 and m1 > m0)
    window = (e0, e1, m0, m1) if not degenerate else (0.0, 1.0, 0.0, 1.0)
    if not degenerate:
        de = (e1 - e0) / w
        dm = (m1 - m0) / h
        for j in range(w):
            eps = e0 + (j + 0.5) * de
            if eps == 0.5 or eps == 0.0:
                continue
            vals = loci(eps)
            for name, bit in _CURVE_BITS.items():
                mu = getattr(vals, name)
                if mu is None:
                    continue
                i = int((mu - m0) / dm)
                if 0 <= i < h:
                    cells[i, j] |= bit
    return Raster(
        window, (w, h), cells, "loci",
        {"curves": dict(_CURVE_BITS), "empty": degenerate},
    )
