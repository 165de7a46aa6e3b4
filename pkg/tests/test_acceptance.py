"""Acceptance suite: one test per primary criterion, each printing a
PASS/FAIL line with the measured quantities.

Heavy renders run at the stated desk scale (512^2 rasters, 1e7 iterates,
N=4096 curve grids), so this module takes a few minutes end to end.
"""

import time

import numpy as np
import pytest

from clmlab.core import (
    Classification,
    FixedPointLabel,
    ParamPoint,
    fixed_points,
    loci,
    map_eval_xy,
    preimage_radicands_xy,
    preimages,
)
from clmlab.geometry import hausdorff_distance, points_to_polyline_distance
from clmlab.invariant_curve import (
    LipGraph,
    build_gamma,
    build_gamma_sequence,
    exterior_bounded_witnesses,
    large_strength_operator,
)
from clmlab.orbits import estimate_attractor, quadrant_itinerary
from clmlab.rasters import (
    AnnulusClass,
    THIS_ATTRACTOR,
    label_components,
    render_basin_of_attractor,
    render_escape,
)
from conftest import cone_interior_points, random_params


def report(tag: str, ok: bool, detail: str):
    print(f"{'PASS' if ok else 'FAIL'} [{tag}] {detail}")
    assert ok, f"{tag}: {detail}"


def test_c01_round_trip_inverse(rng):
    """Every preimage of 1e5 cone-interior points maps back within 1e-12."""
    worst = 0.0
    total = 0
    for p in random_params(rng, 20):
        pts = cone_interior_points(p, rng, 5000)
        r1, r2 = preimage_radicands_xy(p.mu, p.epsilon, pts[:, 0], pts[:, 1])
        s1, s2 = np.sqrt(r1), np.sqrt(r2)
        for sx in (-1.0, 1.0):
            for sy in (-1.0, 1.0):
                wx = 0.5 * (1.0 + sx * s1)
                wy = 0.5 * (1.0 + sy * s2)
                fx, fy = map_eval_xy(p.mu, p.epsilon, wx, wy)
                err = np.hypot(fx - pts[:, 0], fy - pts[:, 1]).max()
                worst = max(worst, float(err))
                total += len(pts)
    report("C1", worst <= 1e-12, f"{total} preimage round-trips, worst error {worst:.2e}")


def _newton_preimages_of_origin(p, grid_n=60):
    """Brute-force oracle: dense grid refined by Newton on F(w) = (0, 0)."""
    g = np.linspace(-0.5, 1.5, grid_n)
    X, Y = np.meshgrid(g, g)
    x, y = X.ravel().copy(), Y.ravel().copy()
    e, mu = p.epsilon, p.mu
    for _ in range(60):
        fx, fy = map_eval_xy(mu, e, x, y)
        gx, gy = fx, fy
        a = (1 - e) * mu * (1 - 2 * x)
        b = e * mu * (1 - 2 * y)
        c = e * mu * (1 - 2 * x)
        d = (1 - e) * mu * (1 - 2 * y)
        det = a * d - b * c
        det = np.where(np.abs(det) < 1e-14, np.nan, det)
        x = x - (d * gx - b * gy) / det
        y = y - (-c * gx + a * gy) / det
    fx, fy = map_eval_xy(mu, e, x, y)
    res = np.hypot(fx, fy)
    ok = np.isfinite(res) & (res < 1e-13)
    sols = np.unique(np.round(np.column_stack([x[ok], y[ok]]), 6), axis=0)
    return sols


def test_c02_origin_preimages_against_newton_oracle(rng):
    corners = {(0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, 1.0)}
    worst = 0.0
    for p in random_params(rng, 20):
        got = sorted((w.x, w.y) for w in preimages(p, (0.0, 0.0)))
        err = max(
            min(abs(gx - cx) + abs(gy - cy) for cx, cy in corners) for gx, gy in got
        )
        worst = max(worst, err)
        assert len(got) == 4
        oracle = _newton_preimages_of_origin(p)
        assert len(oracle) == 4
        for ox, oy in oracle:
            assert min(abs(ox - cx) + abs(oy - cy) for cx, cy in corners) < 1e-5
    report("C2", worst <= 1e-12, f"4 corner preimages at 20 params, worst offset {worst:.2e}")


def test_c03_fixed_point_classification_sweeps(rng):
    bad = 0
    for _ in range(100):
        eps = rng.uniform(-2.0, -0.05)
        lc = loci(eps)
        for mu, want in [
            (rng.uniform(1.0 + 1e-3, lc.mu0_prime - 1e-3), Classification.SADDLE),
            (rng.uniform(lc.mu0_prime + 1e-3, lc.mu2 - 1e-3), Classification.ATTRACTOR),
            (rng.uniform(lc.mu2 + 1e-3, 3.0 - 1e-3), Classification.SADDLE),
            (rng.uniform(3.0 + 1e-3, 6.0), Classification.REPELLER),
        ]:
            fps = {f.label: f for f in fixed_points(ParamPoint(mu, eps))}
            bad += fps[FixedPointLabel.P_MU].classification is not want
            bad += fps[FixedPointLabel.O].classification is not Classification.REPELLER
    for _ in range(100):
        eps = rng.uniform(0.05, 0.40)
        mu0 = loci(eps).mu0
        lo = rng.uniform(1.0 + 1e-3, mu0 * (1 - 1e-4))
        hi = rng.uniform(mu0 * (1 + 1e-4), 6.0)
        fps = {f.label: f for f in fixed_points(ParamPoint(lo, eps))}
        bad += fps[FixedPointLabel.O].classification is not Classification.SADDLE
        fps = {f.label: f for f in fixed_points(ParamPoint(hi, eps))}
        bad += fps[FixedPointLabel.O].classification is not Classification.REPELLER
    report("C3", bad == 0, f"large-strength list and origin flip sweeps, {bad} misclassifications")


def _gamma_invariance(mu, eps, n=4096):
    t0 = time.time()
    res = build_gamma(ParamPoint(mu, eps), n=n)
    elapsed = time.time() - t0
    v = res.curve.assembled.resample(10**4).vertices
    fx, fy = map_eval_xy(mu, eps, v[:, 0], v[:, 1])
    d = points_to_polyline_distance(np.column_stack([fx, fy]), res.curve.assembled)
    return res, float(d.max()), elapsed


def test_c04_invariant_curve_construction():
    n = 4096
    res_a, da, ta = _gamma_invariance(1.6, 0.2, n)
    res_b, db, tb = _gamma_invariance(2.71, -0.9, n)
    fps = [
        f
        for f in fixed_points(ParamPoint(2.71, -0.9))
        if f.label in (FixedPointLabel.P_MU_EPS, FixedPointLabel.R_P_MU_EPS)
    ]
    pts = np.array([[f.location.x, f.location.y] for f in fps])
    dfp = float(points_to_polyline_distance(pts, res_b.curve.assembled).max())
    ok = (
        res_a.converged
        and res_b.converged
        and da <= 4.0 / n
        and db <= 4.0 / n
        and dfp <= 4.0 / n
        and ta <= 60.0
        and tb <= 60.0
    )
    report(
        "C4",
        ok,
        f"gamma at (1.6,0.2) d={da:.2e} {ta:.1f}s and (2.71,-0.9) d={db:.2e} "
        f"{tb:.1f}s, off-diagonal fps at {dfp:.2e} (tol {4.0 / n:.2e})",
    )


def test_c05_large_strength_monotonicity():
    pairs = [(2.0, -0.5), (2.71, -0.9), (2.5, -1.0), (1.8, -0.3), (2.3, -0.7)]
    strict_ok = True
    for mu, eps in pairs:
        p = ParamPoint(mu, eps)
        h = LipGraph(np.zeros(4097))
        for _ in range(5000):
            h2 = large_strength_operator(p, h)
            if h.sup_distance(h2) < 1e-9:
                break
            if not np.all(h2.values[1:-1] > h.values[1:-1]):
                strict_ok = False
            h = h2
    res = build_gamma(ParamPoint(1.3, -0.5), n=4096)
    t = res.curve.graph.grid()
    tent_gap = float(np.abs(res.curve.graph.values - np.minimum(t, 1 - t)).max())
    ok = strict_ok and tent_gap <= 2.0 / 4096
    report(
        "C5",
        ok,
        f"strict interior increase at {len(pairs)} pairs: {strict_ok}; "
        f"tent limit gap {tent_gap:.2e} (tol {2.0 / 4096:.2e})",
    )


def test_c06_hopf_bracket_small_strength():
    from clmlab._kernels import orbit_after
    from clmlab.bifurcation import hopf_bracket

    t0 = time.time()
    pts, esc = orbit_after(4.0, 0.14, 0.3, 0.52, 200000, 2, 0)
    assert esc < 0
    br = hopf_bracket(0.14, 2, 4.0, 4.01, 1e-5, pts[0])
    elapsed = time.time() - t0
    ok = (
        4.0041 <= br.mu_lo
        and br.mu_hi <= 4.0042
        and br.mu_hi - br.mu_lo <= 1e-5
        and br.modulus_lo < 1.0
        and (br.orbit_lost_at_hi or br.modulus_hi > 1.0)
        and elapsed <= 60.0
    )
    report(
        "C6",
        ok,
        f"eps=0.14 crossing in [{br.mu_lo:.6f}, {br.mu_hi:.6f}] "
        f"subseteq [4.0041, 4.0042], {elapsed:.1f}s",
    )


def test_c07_hopf_bracket_large_strength():
    from clmlab._kernels import orbit_after
    from clmlab.bifurcation import hopf_bracket

    pts, esc = orbit_after(2.4, -0.9, 0.67, 0.59, 200000, 2, 1)
    assert esc < 0
    br = hopf_bracket(-0.9, 2, 2.4, 2.6, 1e-3, pts[0])
    # modulus_lo < 1 puts the crossing strictly above mu_lo
    ok = (
        2.525 <= br.mu_lo
        and br.mu_hi < 2.53
        and br.modulus_lo < 1.0
        and (br.orbit_lost_at_hi or br.modulus_hi > 1.0)
        and br.mu_hi - br.mu_lo <= 1e-3
    )
    report(
        "C7",
        ok,
        f"eps=-0.9 crossing in ({br.mu_lo:.6f}, {br.mu_hi:.6f}] inside (2.525, 2.53)",
    )


def test_c08_fat_attractor_periodicity_and_basins():
    t0 = time.time()
    est = estimate_attractor(
        ParamPoint(3.694, 0.01), (0.31, 0.47), n_total=10**7, n_transient=10**4,
        window=(0, 1, 0, 1), resolution=512,
    )
    ok1 = est.period == 2 and est.area_estimate > 0.0 and est.is_fat
    t1 = time.time()
    p = ParamPoint(3.67, 0.01)
    b1 = render_basin_of_attractor(p, (0.511, 0.905), (0, 1, 0, 1), 512, n_max=2000)
    b2 = render_basin_of_attractor(p, (0.18, 0.904), (0, 1, 0, 1), 512, n_max=2000)
    t2 = time.time()
    bounded = (b1.cells < 0) | (b2.cells < 0)
    comp = ((b1.cells == THIS_ATTRACTOR) ^ (b2.cells == THIS_ATTRACTOR)) & bounded
    frac = comp.sum() / bounded.sum()
    ok2 = (
        b1.meta["attractor_period"] == 2
        and b2.meta["attractor_period"] == 2
        and frac >= 0.99
        and (t1 - t0) <= 300
        and (t2 - t1) <= 600
    )
    report(
        "C8",
        ok1 and ok2,
        f"(3.694,0.01) period {est.period}, area {est.area_estimate:.3f}; "
        f"(3.67,0.01) two period-2 basins {frac:.4f} complementary "
        f"({t1 - t0:.0f}s + {t2 - t1:.0f}s)",
    )


def _interior_components(mu, eps, res, n_max, theta512):
    r = render_escape(ParamPoint(mu, eps), (-0.05, 1.05, -0.05, 1.05), res, n_max)
    reps = label_components(r, "escaped")
    thr = theta512 * (res / 512) ** 2
    out = []
    for c in reps:
        if c.touches_border or c.cell_count < thr:
            continue
        x0, x1, y0, y1 = c.bbox
        out.append(
            (
                c.cell_count,
                -0.05 + (x0 + x1) / 2 * 1.1 / res,
                -0.05 + (y0 + y1) / 2 * 1.1 / res,
            )
        )
    return sorted(out, reverse=True)


def test_c09_component_structure():
    a = _interior_components(4.16, 0.38, 512, 10, 10)
    b = _interior_components(4.16, 0.38, 1024, 10, 10)
    # the four largest at 512 sit in the symmetric four-disk arrangement
    # around the critical point
    tops = np.array([(cx, cy) for _, cx, cy in a[:4]])
    sym = all(
        any(np.hypot(tx - cy, ty - cx) < 0.02 for tx, ty in tops)
        and any(np.hypot(1 - tx - cx, 1 - ty - cy) < 0.02 for tx, ty in tops)
        for cx, cy in tops
    )
    ok1 = len(a) == len(b) and len(a) >= 4 and sym
    r = render_escape(ParamPoint(4.03, 0.394), (-0.05, 1.05, -0.05, 1.05), 512, 8)
    singular = [
        c
        for c in label_components(r, "escaped")
        if c.annulus_class is AnnulusClass.SINGULAR
    ]
    ok2 = len(singular) >= 1
    report(
        "C9",
        ok1 and ok2,
        f"(4.16,0.38) interior escaped components {len(a)} at 512^2 == {len(b)} "
        f"at 1024^2 (>=4, symmetric quadruple: {sym}); "
        f"(4.03,0.394) singular annuli {len(singular)}",
    )


def test_c10_itinerary_shift_and_cantor_raster(rng):
    from clmlab.core import map_eval
    from clmlab.preimage import preimage_tree

    p = ParamPoint(6.0, -1.0)
    tree = preimage_tree(p, (5 / 6, 5 / 6), depth=14, point_budget=4000)
    pts = tree.all_points()
    sel = pts[rng.choice(len(pts), size=100, replace=False)]
    holds = 0
    for x, y in sel:
        full = quadrant_itinerary(p, (x, y), 10)
        shifted = quadrant_itinerary(p, map_eval(p, (x, y)), 9)
        m = min(len(full) - 1, len(shifted))
        holds += np.array_equal(full.symbols[1 : 1 + m], shifted.symbols[:m])
    r = render_escape(p, (-0.05, 1.05, -0.05, 1.05), 1024, 2000)
    comps = label_components(r, "bounded")
    biggest = max((c.cell_count for c in comps), default=0)
    ok = holds == 100 and biggest <= 4
    report(
        "C10",
        ok,
        f"shift property on {holds}/100 bounded seeds; bounded raster at 1024^2 "
        f"has {len(comps)} components, largest {biggest} cells (<= 4)",
    )


def test_c11_beyond_mu1_witnesses():
    p_hi = ParamPoint(2.82, -1.0)
    gamma6 = build_gamma_sequence(p_hi, 6, resample=4096)[-1]
    found = exterior_bounded_witnesses(p_hi, gamma6, 200000)
    p_lo = ParamPoint(2.71, -0.9)
    gamma = build_gamma(p_lo, n=4096).curve.assembled
    none = exterior_bounded_witnesses(p_lo, gamma, 200000)
    ok = len(found) > 0 and len(none) == 0
    report(
        "C11",
        ok,
        f"(2.82,-1) bounded exterior witnesses: {len(found)}; "
        f"(2.71,-0.9): {len(none)} (must be 0)",
    )
