import numpy as np
import pytest

from clmlab.core import ParamPoint, fixed_points, FixedPointLabel, map_eval_xy
from clmlab.errors import (
    BranchTopologyError,
    DomainError,
    NoL1Intersection,
    NotConverged,
)
from clmlab.geometry import hausdorff_distance, points_to_polyline_distance
from clmlab.invariant_curve import (
    LipGraph,
    TOL_LIP,
    build_gamma,
    build_gamma_sequence,
    circle_arc_seed,
    exterior_bounded_witnesses,
    large_strength_operator,
    small_strength_operator,
)


def graph_invariants_hold(g: LipGraph, strength: str):
    assert g.values[0] == 0.0 and g.values[-1] == 0.0
    assert g.is_symmetric()
    assert g.lipschitz_constant() <= 1.0 + TOL_LIP
    t = g.grid()
    if strength == "small":
        # graph inside the closed disk, below the axis
        assert np.all(g.values <= 1e-12)
        assert np.all(t**2 + g.values**2 <= t + g.values + 1e-9)
    else:
        assert np.all(g.values >= -1e-12)
        assert np.all(g.values <= np.minimum(t, 1.0 - t) + 1e-9)


class TestOperators:
    def test_arc_application_stays_in_disk(self):
        p = ParamPoint(3.0, 0.3)
        g1 = small_strength_operator(p, circle_arc_seed(1024))
        graph_invariants_hold(g1, "small")

    def test_converged_fixed_point_residue(self):
        p = ParamPoint(3.0, 0.3)
        res = build_gamma(p, n=1024)
        g = res.curve.graph
        assert small_strength_operator(p, g).sup_distance(g) <= 2.0 / 1024

    def test_invariants_hold_along_iteration(self):
        p = ParamPoint(2.71, -0.9)
        h = LipGraph(np.zeros(513))
        for _ in range(12):
            h = large_strength_operator(p, h)
            graph_invariants_hold(h, "large")

    def test_small_tangent_to_antidiagonal(self):
        # one-sided slope at 0 approaches -1 in the contracting regime
        res = build_gamma(ParamPoint(3.0, 0.3), n=2**14)
        g = res.curve.graph
        slope = g.values[1] * g.n_intervals
        assert abs(slope - (-1.0)) < 0.05

    def test_large_strength_monotone(self):
        for mu, eps in [(2.0, -0.5), (2.71, -0.9), (2.5, -1.0), (1.8, -0.3), (2.3, -0.7)]:
            p = ParamPoint(mu, eps)
            h = LipGraph(np.zeros(513))
            for _ in range(3000):
                h2 = large_strength_operator(p, h)
                change = h.sup_distance(h2)
                if change < 1e-9:
                    break
                assert np.all(h2.values[1:-1] > h.values[1:-1]), (mu, eps)
                h = h2

    def test_tent_limit_below_mu0_prime(self):
        res = build_gamma(ParamPoint(1.3, -0.5), n=4096)
        t = res.curve.graph.grid()
        tent = np.minimum(t, 1.0 - t)
        assert np.abs(res.curve.graph.values - tent).max() <= 2.0 / 4096

    def test_large_strength_tangent_slopes(self):
        res = build_gamma(ParamPoint(2.71, -0.9), n=4096)
        g = res.curve.graph
        n = g.n_intervals
        assert g.values[1] * n == pytest.approx(1.0, abs=0.05)
        assert -g.values[-2] * n == pytest.approx(-1.0, abs=0.05)

    def test_off_diagonal_fixed_points_on_gamma(self):
        res = build_gamma(ParamPoint(2.71, -0.9), n=4096)
        fps = [
            f
            for f in fixed_points(ParamPoint(2.71, -0.9))
            if f.label in (FixedPointLabel.P_MU_EPS, FixedPointLabel.R_P_MU_EPS)
        ]
        pts = np.array([[f.location.x, f.location.y] for f in fps])
        d = points_to_polyline_distance(pts, res.curve.assembled)
        assert d.max() <= 4.0 / 4096
        # and the limit sits strictly below the diagonal on (0, 1/2]
        g = res.curve.graph
        t = g.grid()
        inner = (t > 0) & (t <= 0.5)
        assert np.all(g.values[inner] < t[inner])

    def test_no_l1_intersection_above_mu1(self):
        eps = -0.9
        with pytest.raises(NoL1Intersection):
            large_strength_operator(ParamPoint(3.0, eps), LipGraph(np.zeros(257)))

    def test_small_operator_fails_above_mu1(self):
        # mu1(0.3) = 7; above it the preimage no longer splits into two graphs
        with pytest.raises((BranchTopologyError, NoL1Intersection)):
            small_strength_operator(ParamPoint(7.5, 0.3), circle_arc_seed(512))

    def test_strength_dispatch_guards(self):
        with pytest.raises(DomainError):
            small_strength_operator(ParamPoint(2.0, -0.5), circle_arc_seed(64))
        with pytest.raises(DomainError):
            large_strength_operator(ParamPoint(2.0, 0.25), LipGraph(np.zeros(65)))


class TestBuildGamma:
    @pytest.mark.parametrize(
        "mu,eps,regime",
        [
            (1.6, 0.2, "small-monotone"),
            (3.0, 0.3, "small-contracting"),
            (2.71, -0.9, "large-monotone"),
        ],
    )
    def test_positive_invariance(self, mu, eps, regime):
        n = 2048
        res = build_gamma(ParamPoint(mu, eps), n=n)
        assert res.regime == regime and res.converged
        v = res.curve.assembled.resample(8000).vertices
        fx, fy = map_eval_xy(mu, eps, v[:, 0], v[:, 1])
        d = points_to_polyline_distance(np.column_stack([fx, fy]), res.curve.assembled)
        assert d.max() <= 4.0 / n

    def test_complete_invariance_below_four(self):
        # mu < 4: the curve equals its own preimage
        from clmlab.preimage import polyline_preimage

        p = ParamPoint(1.6, 0.2)
        res = build_gamma(p, n=2048)
        pre = polyline_preimage(p, res.curve.assembled, 8192)
        allpts = np.vstack([c.vertices for c in pre])
        assert hausdorff_distance(allpts, res.curve.assembled) <= 6.0 / 2048

    def test_collage_consistency(self):
        """The preimage of the bottom piece is bottom plus top."""
        from clmlab.preimage import polyline_preimage

        p = ParamPoint(3.0, 0.3)
        res = build_gamma(p, n=2048)
        pre = polyline_preimage(p, res.curve.bottom, 8192)
        allpts = np.vstack([c.vertices for c in pre])
        union = np.vstack([res.curve.bottom.vertices, res.curve.top.vertices])
        assert hausdorff_distance(allpts, union) <= 4.0 / 2048

    def test_grid_refinement_stability(self):
        a = build_gamma(ParamPoint(2.71, -0.9), n=1024)
        b = build_gamma(ParamPoint(2.71, -0.9), n=2048)
        d = hausdorff_distance(a.curve.assembled, b.curve.assembled)
        assert d <= 4.0 / 1024

    def test_domain_error_above_mu1(self):
        with pytest.raises(DomainError):
            build_gamma(ParamPoint(2.72, -0.9))
        with pytest.raises(DomainError):
            build_gamma(ParamPoint(2.0, 0.7))

    def test_not_converged_in_contracting_regime(self):
        with pytest.raises(NotConverged) as ei:
            build_gamma(ParamPoint(3.0, 0.3), n=256, max_iters=2, tol=1e-14)
        assert ei.value.last_state is not None

    def test_assembled_through_corner_points(self):
        res = build_gamma(ParamPoint(2.71, -0.9), n=512)
        corners = np.array([[0, 0], [1, 0], [1, 1], [0, 1]], dtype=float)
        d = points_to_polyline_distance(corners, res.curve.assembled)
        assert d.max() <= 1e-12


class TestGammaSequence:
    P = ParamPoint(2.8, -1.0)

    def test_structure_of_first_stage(self):
        curves = build_gamma_sequence(self.P, 3, resample=2048)
        g1 = curves[0]
        assert g1.closed
        corners = np.array([[0, 0], [1, 0], [1, 1], [0, 1]], dtype=float)
        assert points_to_polyline_distance(corners, g1).max() <= 1e-9
        assert hausdorff_distance(g1.vertices, g1.vertices[:, ::-1]) <= 1e-12

    def test_every_stage_contains_origin_preimages(self):
        curves = build_gamma_sequence(self.P, 4, resample=1024)
        corners = np.array([[0, 0], [1, 0], [1, 1], [0, 1]], dtype=float)
        for c in curves:
            assert points_to_polyline_distance(corners, c).max() <= 1e-9

    def test_stage_distances_reported_not_asserted(self):
        curves = build_gamma_sequence(self.P, 5, resample=2048)
        dists = [hausdorff_distance(a, b) for a, b in zip(curves, curves[1:])]
        assert all(d > 0 for d in dists)
        assert dists[-1] < dists[0]

    def test_bottom_piece_loses_graph_property(self):
        """At later stages the bottom piece fails the vertical line test
        near the preimages of (1, 0)."""
        curves = build_gamma_sequence(self.P, 6, resample=8192)
        v = curves[-1].vertices
        # walk the bottom piece: from (0,0) to (1,0) along the assembled ring
        start = int(np.argmin(np.hypot(v[:, 0], v[:, 1])))
        v = np.roll(v, -start, axis=0)
        end = int(np.argmin(np.hypot(v[:, 0] - 1.0, v[:, 1])))
        bottom = v[: end + 1]
        x = bottom[:, 0]
        backtrack = np.maximum.accumulate(x) - x
        assert backtrack.max() > 0.01

    def test_domain_guard(self):
        with pytest.raises(DomainError):
            build_gamma_sequence(ParamPoint(2.6, -1.0), 2)  # below mu_1
        with pytest.raises(DomainError):
            build_gamma_sequence(ParamPoint(2.8, 0.2), 2)  # small strength


class TestWitnesses:
    def test_budget_zero_empty(self):
        res = build_gamma(ParamPoint(2.71, -0.9), n=512)
        assert exterior_bounded_witnesses(ParamPoint(2.71, -0.9), res.curve.assembled, 0) == []

    def test_no_witness_below_mu1(self):
        res = build_gamma(ParamPoint(2.71, -0.9), n=2048)
        out = exterior_bounded_witnesses(
            ParamPoint(2.71, -0.9), res.curve.assembled, 50000
        )
        assert out == []

    def test_witnesses_found_past_mu1(self):
        p = ParamPoint(2.82, -1.0)
        gamma6 = build_gamma_sequence(p, 6, resample=4096)[-1]
        out = exterior_bounded_witnesses(p, gamma6, 200000)
        assert len(out) > 0


class TestLipGraph:
    def test_symmetrization_is_exact(self):
        g = large_strength_operator(ParamPoint(2.5, -0.8), LipGraph(np.zeros(257)))
        assert g.is_symmetric()

    def test_rejects_tiny_arrays(self):
        with pytest.raises(ValueError):
            LipGraph(np.zeros(2))
