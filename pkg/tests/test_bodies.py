"""Support curves, polygons, polytopes: construction, cuts, consistency."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import wulff_lab as wl

FAST = settings(max_examples=30, deadline=None, derandomize=True)


class TestAngleGrid:
    def test_sizes_validated(self):
        with pytest.raises(wl.ConfigError):
            wl.angle_grid(100)  # not a power of two
        with pytest.raises(wl.ConfigError):
            wl.angle_grid(32)  # too small
        assert wl.angle_grid(64).n == 64

    def test_shared_instances(self):
        assert wl.angle_grid(1024) is wl.angle_grid(1024)

    def test_spectral_derivative_exact_for_modes(self, grid):
        h = 2.0 + 0.3 * np.cos(5 * grid.theta) - 0.1 * np.sin(3 * grid.theta)
        h2 = grid.derivative(h, 2)
        expected = -25 * 0.3 * np.cos(5 * grid.theta) + 9 * 0.1 * np.sin(3 * grid.theta)
        np.testing.assert_allclose(h2, expected, atol=1e-12)


class TestWulffCurve:
    def test_euclidean_unit_disk(self, euclid, grid):
        W = wl.wulff_curve(euclid, 1.0, grid=grid)
        np.testing.assert_allclose(W.h, 1.0, atol=1e-15)

    def test_elliptic_boundary_is_sublevel_set(self, elliptic12, grid):
        # Boundary of {F* < 1} must satisfy x^2 + 4 y^2 = 1.
        W = wl.wulff_curve(elliptic12, 1.0, grid=grid)
        x = W.points()
        np.testing.assert_allclose(x[:, 0] ** 2 + 4.0 * x[:, 1] ** 2, 1.0, atol=1e-12)
        expected_h = np.sqrt(np.cos(grid.theta) ** 2 + np.sin(grid.theta) ** 2 / 4.0)
        np.testing.assert_allclose(W.h, expected_h, atol=1e-14)

    def test_translation_adds_linear_term(self, euclid, grid):
        W = wl.wulff_curve(euclid, 1.0, center=(0.3, 0.0), grid=grid)
        np.testing.assert_allclose(W.h, 1.0 + 0.3 * np.cos(grid.theta), atol=1e-14)

    def test_boundary_polar_equals_radius(self, norms, grid):
        for norm in norms.values():
            for r in (0.5, 2.0):
                W = wl.wulff_curve(norm, r, grid=grid)
                np.testing.assert_allclose(norm.polar(W.points()), r, atol=1e-8 * r)


class TestFromFourier:
    def test_unit_disk(self, grid):
        disk = wl.curve_from_fourier(grid, 1.0)
        np.testing.assert_allclose(disk.h, 1.0)

    def test_mild_second_mode_is_convex(self, grid):
        # h + h'' = 1 - 0.3 cos 2t > 0
        c = wl.curve_from_fourier(grid, 1.0, [(0.0, 0.0), (0.1, 0.0)])
        assert c.support_weight.min() == pytest.approx(0.7, abs=1e-12)

    def test_strong_second_mode_rejected(self, grid):
        # h + h'' = 1 - 1.2 cos 2t < 0 at t = 0
        with pytest.raises(wl.NotConvex):
            wl.curve_from_fourier(grid, 1.0, [(0.0, 0.0), (0.4, 0.0)])

    def test_support_function_consistency(self, grid):
        # h(t) must equal the support of the sampled boundary cloud.
        c = wl.curve_from_fourier(grid, 1.0, [(0.0, 0.0), (0.08, -0.03), (0.0, 0.02)])
        pts = c.points()
        recovered = np.max(grid.unit @ pts.T, axis=1)
        np.testing.assert_allclose(recovered, c.h, atol=1e-8)


class TestCurveGeometry:
    def test_disk_polygon_area(self, euclid):
        grid = wl.angle_grid(1024)
        poly = wl.wulff_curve(euclid, 1.0, grid=grid).to_polygon()
        # inscribed regular 1024-gon: area = (n/2) sin(2 pi/n)
        exact = 0.5 * grid.n * math.sin(2.0 * math.pi / grid.n)
        assert wl.volume(poly) == pytest.approx(exact, rel=1e-12)
        assert abs(wl.volume(poly) - math.pi) < 2.5e-5

    def test_polygonization_converges_quadratically(self, elliptic12):
        errs = []
        for n in (256, 512, 1024):
            curve = wl.wulff_curve(elliptic12, 1.0, grid=wl.angle_grid(n))
            errs.append(abs(wl.volume(curve.to_polygon()) - wl.volume(curve)))
        assert errs[0] / errs[1] > 3.5  # O(n^-2) halving
        assert errs[1] / errs[2] > 3.5

    def test_ellipse_curvature_at_axis_end(self, elliptic12, grid):
        # x^2 + 4y^2 = 1 at (1, 0): curvature = major/minor^2 = 1/(1/2)^2.
        W = wl.wulff_curve(elliptic12, 1.0, grid=grid)
        assert W.curvatures()[0] == pytest.approx(4.0, rel=1e-10)

    def test_translated_disk_curvature_invariant(self, euclid, grid):
        c = wl.wulff_curve(euclid, 1.0, center=(0.3, 0.0), grid=grid)
        np.testing.assert_allclose(c.curvatures(), 1.0, atol=1e-10)

    def test_off_grid_interpolation(self, elliptic12, grid):
        W = wl.wulff_curve(elliptic12, 1.0, grid=grid)
        theta = np.array([0.123456, 2.71828, 5.0])
        expected = np.sqrt(np.cos(theta) ** 2 + np.sin(theta) ** 2 / 4.0)
        np.testing.assert_allclose(W.eval_h(theta), expected, atol=1e-12)

    def test_scaling(self, elliptic12, grid):
        W = wl.wulff_curve(elliptic12, 1.0, grid=grid)
        np.testing.assert_allclose(W.scaled(2.0).h, wl.wulff_curve(elliptic12, 2.0, grid=grid).h)


class TestBox:
    def test_square(self):
        sq = wl.box((1.0, 1.0))
        assert len(sq) == 4
        assert wl.volume(sq) == pytest.approx(4.0, abs=0)

    def test_thin_box_volume(self):
        assert wl.volume(wl.box((10.0, 0.1))) == pytest.approx(4.0, rel=1e-14)

    def test_cube(self):
        cube = wl.box((1.0, 1.0, 1.0))
        assert len(cube.facets) == 6
        assert wl.volume(cube) == pytest.approx(8.0, rel=1e-13)

    def test_positive_halfwidths_required(self):
        with pytest.raises(wl.ConfigError):
            wl.box((1.0, -1.0))


class TestHalfspaceCut:
    def test_half_square(self):
        sq = wl.box((1.0, 1.0))
        cut = wl.halfspace_cut(sq, (0.0, 1.0), 0.0)
        assert wl.volume(cut) == pytest.approx(2.0, abs=1e-14)
        assert np.max(cut.vertices[:, 1]) == pytest.approx(0.0, abs=1e-14)

    def test_supporting_halfspace_is_identity(self):
        sq = wl.box((1.0, 1.0))
        assert wl.halfspace_cut(sq, (0.0, 1.0), 1.0) is sq

    def test_missing_halfspace_raises(self):
        with pytest.raises(wl.EmptyCut):
            wl.halfspace_cut(wl.box((1.0, 1.0)), (1.0, 0.0), -1.5)

    def test_touching_halfspace_degenerate(self):
        with pytest.raises((wl.DegenerateCut, wl.EmptyCut)):
            wl.halfspace_cut(wl.box((1.0, 1.0)), (1.0, 0.0), -1.0)

    def test_corner_cut_area(self):
        # depth-eps cut along the diagonal removes a triangle of area eps^2
        sq = wl.box((1.0, 1.0))
        d = np.array([1.0, 1.0]) / math.sqrt(2.0)
        eps = 0.5
        cut = wl.halfspace_cut(sq, d, sq.support(d) - eps)
        assert wl.volume(cut) == pytest.approx(4.0 - eps**2, rel=1e-14)

    @FAST
    @given(
        angle=st.floats(0, 2 * math.pi, allow_nan=False),
        frac=st.floats(0.05, 0.95),
    )
    def test_cut_volume_monotone(self, angle, frac):
        sq = wl.box((1.0, 1.0))
        d = np.array([math.cos(angle), math.sin(angle)])
        lo = -sq.support(-d)
        hi = sq.support(d)
        offset = lo + frac * (hi - lo)
        cut = wl.halfspace_cut(sq, d, offset)
        assert 0.0 < wl.volume(cut) < 4.0 + 1e-12
        assert np.max(cut.vertices @ d) <= offset + 1e-12


class TestPolygonValidation:
    def test_clockwise_rejected(self):
        with pytest.raises(wl.NotConvex):
            wl.Polygon2([[0, 0], [0, 1], [1, 0]])

    def test_collinear_rejected(self):
        with pytest.raises(wl.NotConvex):
            wl.Polygon2([[0, 0], [1, 0], [2, 0], [1, 1]])

    def test_hull_of_noisy_points(self, rng):
        pts = rng.standard_normal((40, 2))
        hull = wl.convex_hull_2d(pts)
        # every input point lies inside the hull (within tolerance)
        for d, off in zip(hull.edge_normals, np.einsum("ij,ij->i", hull.edge_normals, hull.vertices)):
            assert np.max(pts @ d) <= off + 1e-12


class TestPolytope:
    def test_cross_polytope_volume(self):
        octa = wl.cross_polytope(3)
        assert wl.volume(octa) == pytest.approx(4.0 / 3.0, rel=1e-13)

    def test_facet_planarity_enforced(self):
        verts = np.array([[0.0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]])
        bad_facets = [([0, 1, 2], [0, 0, -1], 0.1)]  # offset inconsistent
        with pytest.raises(wl.ConfigError):
            wl.PolytopeN(verts, bad_facets)

    def test_brute_force_hull_matches_scipy(self, rng):
        from scipy.spatial import ConvexHull

        pts = rng.standard_normal((24, 3))
        ours = wl.convex_hull(pts)
        theirs = ConvexHull(pts)
        assert wl.volume(ours) == pytest.approx(theirs.volume, rel=1e-10)

    def test_hull_point_limit(self, rng):
        with pytest.raises(wl.ConfigError):
            wl.convex_hull(rng.standard_normal((65, 3)))


class TestEllipseBodies:
    def test_ellipse_support(self, grid):
        body = wl.ellipse_body((3.0, 0.4), grid)
        x = body.points()
        np.testing.assert_allclose((x[:, 0] / 3.0) ** 2 + (x[:, 1] / 0.4) ** 2, 1.0, atol=1e-10)

    def test_excess_ellipse_matches_adjusted_wulff(self, grid):
        eps = 0.05
        body = wl.ellipse_excess_body(eps, (1.0, 2.0), grid)
        adjusted = wl.elliptic_norm(axes=(1.0 * (1 - eps), 2.0 * (1 + eps)))
        np.testing.assert_allclose(body.h, wl.wulff_curve(adjusted, 1.0, grid=grid).h, atol=1e-14)


def test_shape_spec_roundtrip(grid, elliptic12):
    specs = [
        {"kind": "box", "halfwidths": [1.0, 2.0]},
        {"kind": "polygon", "vertices": [[1, 0], [0, 1], [-1, 0], [0, -1]]},
        {"kind": "support_fourier", "a0": 1.0, "coeffs": [[0.0, 0.0], [0.05, -0.02]]},
        {"kind": "wulff", "r": 0.7, "center": [0.1, -0.2]},
    ]
    for spec in specs:
        body = wl.shape_from_spec(spec, grid=grid, norm=elliptic12)
        if spec["kind"] == "wulff":
            continue  # wulff serializes through its samples
        again = wl.shape_from_spec(wl.shape_to_spec(body), grid=grid, norm=elliptic12)
        assert wl.volume(again) == pytest.approx(wl.volume(body), rel=1e-12)
