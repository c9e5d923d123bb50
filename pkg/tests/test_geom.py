import math

import numpy as np
import pytest

from indisk.geom import (
    ConvexPolygon,
    Disk,
    HalfPlane,
    circumradius,
    convex_hull,
    cut_polygon,
    halfplane_of,
    intersect_halfplanes,
    invert,
    polygon_minus_disk_area,
)

SQUARE_ANCHORS = [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)]


def square_polygon():
    poly = intersect_halfplanes(halfplane_of(a) for a in SQUARE_ANCHORS)
    assert poly is not None
    return poly


def random_cell(seed, n_anchors=12, lo=1.0, hi=2.0):
    """Random bounded origin-containing cell from anchors in an annulus."""
    rng = np.random.default_rng(seed)
    while True:
        rho = rng.uniform(lo, hi, n_anchors)
        theta = rng.uniform(0.0, 2.0 * np.pi, n_anchors)
        anchors = np.column_stack((rho * np.cos(theta), rho * np.sin(theta)))
        poly = intersect_halfplanes(halfplane_of(a) for a in anchors)
        if poly is not None:
            return poly, anchors


def radial_area_outside(poly, s, n=1 << 18):
    """Quadrature oracle for the polygon-minus-centered-disk area.

    Valid for polygons containing the origin: integrates the squared radial
    support over a dense midpoint grid.
    """
    v = poly.vertices
    w = np.roll(v, -1, axis=0)
    e = w - v
    elen = np.sqrt(np.sum(e * e, axis=1))
    normals = np.column_stack((e[:, 1], -e[:, 0])) / elen[:, None]  # outward for CCW
    c = np.sum(v * normals, axis=1)
    assert np.all(c > 0), "oracle needs the origin strictly inside"
    theta = (np.arange(n) + 0.5) * (2.0 * np.pi / n)
    u = np.column_stack((np.cos(theta), np.sin(theta)))
    dots = u @ normals.T
    with np.errstate(divide="ignore"):
        rho_edges = np.where(dots > 1e-12, c[None, :] / dots, np.inf)
    rho = rho_edges.min(axis=1)
    integrand = 0.5 * np.maximum(rho * rho - s * s, 0.0)
    return integrand.mean() * 2.0 * np.pi


class TestInvert:
    def test_simple_values(self):
        assert np.allclose(invert((2.0, 0.0)), (0.5, 0.0))
        assert np.allclose(invert((1.0, 1.0)), (0.5, 0.5))

    def test_involution(self):
        p = np.array([0.3, 0.4])
        assert np.allclose(invert(invert(p)), p, rtol=1e-12, atol=0)

    def test_involution_random(self):
        rng = np.random.default_rng(1)
        pts = rng.uniform(-1, 1, size=(300, 2))
        pts = pts[np.hypot(pts[:, 0], pts[:, 1]) > 1e-3]
        back = invert(invert(pts))
        assert np.allclose(back, pts, rtol=1e-12, atol=0)

    def test_preserves_unit_circle_and_swaps_sides(self):
        rng = np.random.default_rng(2)
        theta = rng.uniform(0, 2 * np.pi, 50)
        on_circle = np.column_stack((np.cos(theta), np.sin(theta)))
        assert np.allclose(invert(on_circle), on_circle, atol=1e-15)
        outside = 3.0 * on_circle
        assert np.all(np.hypot(*invert(outside).T) < 1.0)

    def test_zero_rejected(self):
        with pytest.raises(ValueError):
            invert((0.0, 0.0))


class TestHalfPlane:
    def test_axis_aligned(self):
        h = halfplane_of((1.0, 0.0))
        assert h.contains((0.5, 7.0)) and h.contains((1.0, -3.0))
        assert not h.contains((1.1, 0.0))
        v = halfplane_of((0.0, 2.0))
        assert v.contains((5.0, 1.9)) and not v.contains((0.0, 2.1))

    def test_offset_is_anchor_norm(self):
        assert halfplane_of((3.0, 4.0)).offset == pytest.approx(5.0, abs=1e-15)

    def test_contains_origin_strictly(self):
        rng = np.random.default_rng(3)
        for _ in range(100):
            a = rng.normal(size=2)
            if np.hypot(*a) < 1e-6:
                continue
            assert halfplane_of(a).contains((0.0, 0.0))

    def test_zero_anchor_rejected(self):
        with pytest.raises(ValueError):
            halfplane_of((0.0, 0.0))


class TestIntersectHalfplanes:
    def test_square(self):
        poly = square_polygon()
        assert len(poly) == 4
        assert poly.area() == pytest.approx(4.0, abs=1e-12)
        got = sorted(map(tuple, np.round(poly.vertices, 12)))
        assert got == [(-1.0, -1.0), (-1.0, 1.0), (1.0, -1.0), (1.0, 1.0)]

    def test_two_halfplanes_unbounded(self):
        assert intersect_halfplanes([halfplane_of((1, 0)), halfplane_of((0, 1))]) is None

    def test_empty_unbounded(self):
        assert intersect_halfplanes([]) is None

    def test_redundant_leaves_square_unchanged(self):
        hs = [halfplane_of(a) for a in SQUARE_ANCHORS] + [halfplane_of((2.0, 0.0))]
        poly = intersect_halfplanes(hs)
        assert len(poly) == 4
        assert poly.area() == pytest.approx(4.0, abs=1e-12)

    def test_edge_anchors_recorded(self):
        poly = square_polygon()
        got = sorted(map(tuple, (np.round(a, 12) for a in poly.anchors)))
        assert got == sorted(SQUARE_ANCHORS)

    def test_anchor_lines_carry_edges(self):
        poly, _ = random_cell(10)
        v = poly.vertices
        w = np.roll(v, -1, axis=0)
        for i, a in enumerate(poly.anchors):
            c = a @ a
            assert abs(v[i] @ a - c) < 1e-9
            assert abs(w[i] @ a - c) < 1e-9

    def test_redundancy_beyond_circumradius(self):
        # offset beyond the circumradius can never change the result
        rng = np.random.default_rng(4)
        for seed in range(10):
            poly, anchors = random_cell(100 + seed)
            rc = poly.circumradius()
            theta = rng.uniform(0, 2 * np.pi)
            extra = (rc * 1.5) * np.array([np.cos(theta), np.sin(theta)])
            again = intersect_halfplanes(
                [halfplane_of(a) for a in anchors] + [halfplane_of(extra)]
            )
            assert np.allclose(again.vertices, poly.vertices, atol=1e-12)
            _, changed = cut_polygon(poly, halfplane_of(extra))
            assert not changed

    def test_cut_monotone(self):
        rng = np.random.default_rng(5)
        for seed in range(10):
            poly, _ = random_cell(200 + seed)
            rho = rng.uniform(1.0, poly.circumradius())
            theta = rng.uniform(0, 2 * np.pi)
            cut, _ = cut_polygon(poly, halfplane_of(rho * np.array([np.cos(theta), np.sin(theta)])))
            assert cut.area() <= poly.area() + 1e-12
            assert cut.circumradius() <= poly.circumradius() + 1e-12


class TestConvexHull:
    def test_triangle(self):
        hull = convex_hull([(0, 0), (1, 0), (0, 1)])
        assert len(hull) == 3

    def test_interior_point_excluded(self):
        hull = convex_hull([(0, 0), (1, 0), (1, 1), (0, 1), (0.5, 0.5)])
        assert len(hull) == 4

    def test_collinear_midpoint_excluded(self):
        hull = convex_hull([(0, 0), (0.5, 0), (1, 0), (0, 1)])
        assert len(hull) == 3

    def test_degenerate_inputs(self):
        with pytest.raises(ValueError):
            convex_hull([(0, 0), (1, 1)])
        with pytest.raises(ValueError):
            convex_hull([(0, 0), (1, 1), (2, 2), (3, 3)])

    def test_order_invariance(self):
        rng = np.random.default_rng(6)
        pts = rng.normal(size=(40, 2))
        ref = convex_hull(pts).vertices
        for _ in range(5):
            perm = rng.permutation(len(pts))
            got = convex_hull(pts[perm]).vertices
            assert np.array_equal(got, ref)

    def test_hull_of_extremes_is_same_hull(self):
        rng = np.random.default_rng(7)
        for seed in range(5):
            pts = np.random.default_rng(seed).normal(size=(60, 2))
            hull = convex_hull(pts)
            again = convex_hull(hull.vertices)
            assert np.array_equal(again.vertices, hull.vertices)

    def test_removing_extreme_changes_hull_removing_interior_does_not(self):
        rng = np.random.default_rng(8)
        pts = rng.normal(size=(30, 2))
        hull = convex_hull(pts)
        keys = {tuple(v) for v in hull.vertices}
        for i in range(len(pts)):
            rest = np.delete(pts, i, axis=0)
            other = convex_hull(rest)
            if tuple(pts[i]) in keys:
                assert len(other) != len(hull) or not np.array_equal(other.vertices, hull.vertices)
            else:
                assert np.array_equal(other.vertices, hull.vertices)


class TestPolygonMinusDisk:
    def test_square_values(self):
        poly = square_polygon()
        assert polygon_minus_disk_area(poly, 1.0) == pytest.approx(4.0 - math.pi, abs=1e-12)
        assert polygon_minus_disk_area(poly, math.sqrt(2.0)) == 0.0
        assert polygon_minus_disk_area(poly, 0.0) == pytest.approx(4.0, abs=1e-12)

    def test_negative_radius_rejected(self):
        with pytest.raises(ValueError):
            polygon_minus_disk_area(square_polygon(), -0.1)

    def test_nonincreasing_in_radius(self):
        poly, _ = random_cell(11)
        values = [polygon_minus_disk_area(poly, s) for s in np.linspace(0, poly.circumradius() * 1.1, 60)]
        assert all(a >= b - 1e-12 for a, b in zip(values, values[1:]))

    def test_disk_inside_polygon_exact(self):
        for seed in range(8):
            poly, _ = random_cell(300 + seed)
            s = 0.9 * poly.inradius()
            expect = poly.area() - math.pi * s * s
            assert polygon_minus_disk_area(poly, s) == pytest.approx(expect, rel=1e-12)

    def test_against_quadrature_oracle(self):
        for seed in range(6):
            poly, _ = random_cell(400 + seed)
            rin, rout = poly.inradius(), poly.circumradius()
            for s in (0.5 * rin, rin, 0.5 * (rin + rout), 0.97 * rout):
                exact = polygon_minus_disk_area(poly, s)
                oracle = radial_area_outside(poly, s)
                assert exact == pytest.approx(oracle, abs=3e-7, rel=1e-6)

    def test_polygon_not_containing_origin(self):
        # signed decomposition stays exact when the origin is outside
        tri = ConvexPolygon(np.array([[2.0, 0.5], [3.0, 0.5], [2.5, 1.5]]))
        s = 2.4
        rng = np.random.default_rng(12)
        n = 400_000
        pts = np.column_stack((rng.uniform(2.0, 3.0, n), rng.uniform(0.5, 1.5, n)))
        inside = np.ones(n, dtype=bool)
        v = tri.vertices
        w = np.roll(v, -1, axis=0)
        for i in range(3):
            inside &= (w[i, 0] - v[i, 0]) * (pts[:, 1] - v[i, 1]) - (w[i, 1] - v[i, 1]) * (
                pts[:, 0] - v[i, 0]
            ) >= 0
        hit = inside & (np.hypot(pts[:, 0], pts[:, 1]) > s)
        p = hit.mean()
        mc = p * 1.0  # box area is 1
        se = math.sqrt(p * (1 - p) / n)
        assert abs(polygon_minus_disk_area(tri, s) - mc) < 4 * se


class TestCircumradius:
    def test_square(self):
        assert circumradius(square_polygon()) == pytest.approx(math.sqrt(2.0), abs=1e-12)

    def test_triangle(self):
        tri = ConvexPolygon(np.array([[1.0, 0.0], [0.0, 3.0], [-1.0, 0.0]]))
        assert circumradius(tri) == pytest.approx(3.0, abs=1e-15)

    def test_regular_hexagon(self):
        theta = np.arange(6) * (math.pi / 3.0)
        hexagon = ConvexPolygon(np.column_stack((np.cos(theta), np.sin(theta))))
        assert circumradius(hexagon) == pytest.approx(1.0, abs=1e-15)


class TestPolygonBasics:
    def test_rejects_clockwise(self):
        with pytest.raises(ValueError):
            ConvexPolygon(np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0]]))

    def test_rejects_too_few(self):
        with pytest.raises(ValueError):
            ConvexPolygon(np.array([[0.0, 0.0], [1.0, 0.0]]))

    def test_inradius_square(self):
        assert square_polygon().inradius() == 1.0

    def test_contains_point(self):
        poly = square_polygon()
        assert poly.contains_point((0.0, 0.0))
        assert poly.contains_point((0.99, 0.99))
        assert not poly.contains_point((1.01, 0.0))


class TestDisk:
    def test_contains(self):
        d = Disk(center=(0.5, 0.0), radius=0.5)
        assert d.contains((0.0, 0.0)) and d.contains((1.0, 0.0))
        assert not d.contains((1.0, 0.2))

    def test_validation(self):
        with pytest.raises(ValueError):
            Disk(center=(0.0, 0.0), radius=-1.0)
