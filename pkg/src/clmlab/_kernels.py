"""Numba kernels for the iterate-heavy loops (orbits, rasters).

Escape modes: 0 tests exit from the closed disk x^2+y^2 <= x+y, 1 tests exit
from the unit square.  Both include the norm-overflow guard ||z|| > 1e8 so
float infinities never reach the rasters.  Cell (0, 0) of every grid is the
lower-left corner of the window; rows run bottom-up.
"""

import numba
import numpy as np
from numba import njit, prange

NORM_GUARD = 1e8


@njit(cache=True, inline="always")
def _escaped(x, y, mode):
    if abs(x) > NORM_GUARD or abs(y) > NORM_GUARD:
        return True
    if mode == 1:
        return x < 0.0 or x > 1.0 or y < 0.0 or y > 1.0
    return x * x + y * y > x + y


@njit(cache=True, inline="always")
def _step(mu, eps, x, y):
    fx = mu * x * (1.0 - x)
    fy = mu * y * (1.0 - y)
    return (1.0 - eps) * fx + eps * fy, (1.0 - eps) * fy + eps * fx


@njit(cache=True)
def iterate_capture(mu, eps, x0, y0, n_max, stride, mode):
    """Forward orbit with decimated capture.

    Returns (samples, gaps, n_samples, escape_step); escape_step is -1 when
    the orbit never left the escape region within n_max steps.  Samples are
    taken at steps 0, stride, 2*stride, ... plus the escaping iterate.
    """
    cap = n_max // stride + 2
    samples = np.empty((cap, 2), dtype=np.float64)
    gaps = np.empty(cap, dtype=np.float64)
    n_samples = 0
    x, y = x0, y0
    escape_step = -1
    for k in range(n_max + 1):
        if k % stride == 0:
            samples[n_samples, 0] = x
            samples[n_samples, 1] = y
            gaps[n_samples] = abs(x - y)
            n_samples += 1
        if _escaped(x, y, mode):
            if (k % stride) != 0:
                samples[n_samples, 0] = x
                samples[n_samples, 1] = y
                gaps[n_samples] = abs(x - y)
                n_samples += 1
            escape_step = k
            break
        if k < n_max:
            x, y = _step(mu, eps, x, y)
    return samples[:n_samples], gaps[:n_samples], n_samples, escape_step


@njit(cache=True)
def orbit_after(mu, eps, x0, y0, n_skip, n_keep, mode):
    """Skip n_skip steps, then record n_keep consecutive iterates.

    Returns (points, escape_step); on escape the recorded prefix is valid up
    to the escaping iterate (exclusive).
    """
    pts = np.empty((n_keep, 2), dtype=np.float64)
    x, y = x0, y0
    for k in range(n_skip):
        if _escaped(x, y, mode):
            return pts[:0], k
        x, y = _step(mu, eps, x, y)
    for i in range(n_keep):
        if _escaped(x, y, mode):
            return pts[:i], n_skip + i
        pts[i, 0] = x
        pts[i, 1] = y
        x, y = _step(mu, eps, x, y)
    return pts, -1


@njit(cache=True, parallel=True)
def escape_grid(mu, eps, xmin, xmax, ymin, ymax, width, height, n_max, mode):
    """Escape step of each cell center, -1 where still bounded at n_max."""
    out = np.empty((height, width), dtype=np.int32)
    dx = (xmax - xmin) / width
    dy = (ymax - ymin) / height
    for i in prange(height):
        y0 = ymin + (i + 0.5) * dy
        for j in range(width):
            x = xmin + (j + 0.5) * dx
            y = y0
            res = np.int32(-1)
            for k in range(n_max + 1):
                if _escaped(x, y, mode):
                    res = np.int32(k)
                    break
                x, y = _step(mu, eps, x, y)
            out[i, j] = res
    return out


@njit(cache=True)
def accumulate_orbit(
    mu, eps, x0, y0, n_total, n_transient, xmin, xmax, ymin, ymax, width, height, tail_cap, mode
):
    """Rasterize iterates n_transient..n_total of one orbit into a grid.

    Returns (occupied, tail, hits, escape_step, x, y).  ``tail`` holds the
    flat cell index of each of the last ``tail_cap`` post-transient iterates
    in order (-1 for iterates outside the window), for period detection.
    """
    occupied = np.zeros((height, width), dtype=np.uint8)
    dx = (xmax - xmin) / width
    dy = (ymax - ymin) / height
    x, y = x0, y0
    hits = 0
    tail_start = n_total - tail_cap + 1
    if tail_start < n_transient:
        tail_start = n_transient
    tail = np.full(n_total - tail_start + 1, -1, dtype=np.int64)
    for k in range(n_total + 1):
        if _escaped(x, y, mode):
            return occupied, tail, hits, k, x, y
        if k >= n_transient:
            j = int((x - xmin) / dx)
            i = int((y - ymin) / dy)
            inside = 0 <= j < width and 0 <= i < height
            if inside:
                occupied[i, j] = 1
                hits += 1
            if k >= tail_start:
                tail[k - tail_start] = i * width + j if inside else -1
        if k < n_total:
            x, y = _step(mu, eps, x, y)
    return occupied, tail, hits, -1, x, y


@njit(cache=True, parallel=True)
def basin_grid(
    mu, eps, occupied, xmin, xmax, ymin, ymax, n_transient, n_test, mode
):
    """Classify each cell center against a known attractor cell set.

    Output codes: k >= 0 escape step, -1 post-transient orbit lands in the
    occupied set (majority of test steps), -2 bounded but elsewhere.
    """
    height, width = occupied.shape
    out = np.empty((height, width), dtype=np.int32)
    dx = (xmax - xmin) / width
    dy = (ymax - ymin) / height
    for i in prange(height):
        yc = ymin + (i + 0.5) * dy
        for j in range(width):
            x = xmin + (j + 0.5) * dx
            y = yc
            code = np.int32(-3)
            for k in range(n_transient):
                if _escaped(x, y, mode):
                    code = np.int32(k)
                    break
                x, y = _step(mu, eps, x, y)
            if code == -3:
                hits = 0
                for t in range(n_test):
                    if _escaped(x, y, mode):
                        code = np.int32(n_transient + t)
                        break
                    jj = int((x - xmin) / dx)
                    ii = int((y - ymin) / dy)
                    if 0 <= jj < width and 0 <= ii < height and occupied[ii, jj] == 1:
                        hits += 1
                    x, y = _step(mu, eps, x, y)
                if code == -3:
                    code = np.int32(-1) if 2 * hits >= n_test else np.int32(-2)
            out[i, j] = code
    return out


@njit(cache=True, parallel=True)
def bounded_mask(mu, eps, pts, n_steps, mode):
    """Escape step per seed point, -1 where bounded for n_steps."""
    n = pts.shape[0]
    out = np.empty(n, dtype=np.int32)
    for idx in prange(n):
        x = pts[idx, 0]
        y = pts[idx, 1]
        res = np.int32(-1)
        for k in range(n_steps + 1):
            if _escaped(x, y, mode):
                res = np.int32(k)
                break
            x, y = _step(mu, eps, x, y)
        out[idx] = res
    return out


def set_threads(n: int | None):
    """Cap worker parallelism for the prange kernels."""
    if n is not None and n > 0:
        numba.set_num_threads(min(n, numba.config.NUMBA_NUM_THREADS))
