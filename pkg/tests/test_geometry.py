import math

import numpy as np
import pytest

from hexvof.geometry import (
    Box,
    Capsule,
    HalfSpace,
    NoAnalyticVolume,
    Sphere,
    SphereClass,
    Torus,
    Transformed,
    classify_sphere,
    closest_point,
    contains,
    exact_volume,
    from_config,
)

A = (-0.51, -0.49, -0.52)
B = (0.49, 0.51, 0.48)


def capsule():
    return Capsule(A, B, 0.2)


def all_geometries():
    return [
        Sphere((0.1, -0.2, 0.3), 0.7),
        capsule(),
        Box((-0.3, -0.5, -0.2), (0.4, 0.6, 0.9)),
        Torus((0.0, 0.1, 0.0), (0.0, 0.3, 1.0), 0.8, 0.25),
        Transformed.from_axis_angle(
            Capsule((0, 0, -0.5), (0, 0, 0.5), 0.3), (1, 1, 0), 0.7, (0.2, 0.0, -0.1), 1.5
        ),
    ]


class TestContains:
    def test_sphere_center(self):
        assert contains(Sphere(), (0, 0, 0))

    def test_sphere_outside(self):
        assert not contains(Sphere(), (2, 0, 0))

    def test_capsule_endpoint(self):
        assert contains(capsule(), A)

    def test_boundary_counts_inside(self):
        assert contains(Sphere(), (1, 0, 0))
        assert contains(Box((0, 0, 0), (1, 1, 1)), (1, 0.5, 0.5))

    def test_vectorized(self):
        pts = np.array([[0, 0, 0], [2, 0, 0], [0.5, 0.5, 0.5]])
        np.testing.assert_array_equal(contains(Sphere(), pts), [True, False, True])


class TestClosestPoint:
    def test_sphere_radial(self):
        np.testing.assert_allclose(closest_point(Sphere(), (2, 0, 0)), (1, 0, 0))

    def test_sphere_center_tie(self):
        np.testing.assert_array_equal(closest_point(Sphere(), (0, 0, 0)), (1, 0, 0))

    def test_capsule_beyond_endpoint(self):
        g = capsule()
        u = g.axis
        x = np.array(B) + 1.0 * u
        expected = np.array(B) + 0.2 * u
        np.testing.assert_allclose(closest_point(g, x), expected, atol=1e-14)

        # dense sampling of the capsule surface as an independent check
        rng = np.random.default_rng(1)
        d = rng.normal(size=(400_000, 3))
        d /= np.linalg.norm(d, axis=1)[:, None]
        t = rng.uniform(0, 1, size=len(d))
        axis_pts = np.array(A) + t[:, None] * (np.array(B) - np.array(A))
        radial = d - (d @ u)[:, None] * u
        radial /= np.linalg.norm(radial, axis=1)[:, None]
        surface = np.concatenate(
            [axis_pts + 0.2 * radial, np.array(A) + 0.2 * d, np.array(B) + 0.2 * d]
        )
        surface = surface[np.abs(np.linalg.norm(surface - g._axis_point(surface), axis=1) - 0.2) < 1e-12]
        nearest = surface[np.argmin(np.linalg.norm(surface - x, axis=1))]
        assert np.linalg.norm(nearest - expected) < 5e-3
        assert np.linalg.norm(x - expected) <= np.linalg.norm(surface - x, axis=1).min() + 1e-12

    def test_capsule_axis_tie_is_deterministic(self):
        g = capsule()
        mid = 0.5 * (np.array(A) + np.array(B))
        p1 = closest_point(g, mid)
        p2 = closest_point(g, mid)
        np.testing.assert_array_equal(p1, p2)
        assert abs(np.linalg.norm(p1 - mid) - 0.2) < 1e-15
        assert abs(np.dot(p1 - mid, g.axis)) < 1e-15

    def test_box_interior_projects_to_nearest_face(self):
        g = Box((0, 0, 0), (1, 2, 3))
        np.testing.assert_allclose(closest_point(g, (0.9, 1.0, 1.5)), (1.0, 1.0, 1.5))
        np.testing.assert_allclose(closest_point(g, (0.5, 0.1, 1.5)), (0.5, 0.0, 1.5))
        # equidistant from +x and -x faces: +x wins
        np.testing.assert_allclose(closest_point(g, (0.5, 1.0, 1.5)), (1.0, 1.0, 1.5))

    def test_box_exterior_clamps(self):
        g = Box((0, 0, 0), (1, 1, 1))
        np.testing.assert_allclose(closest_point(g, (2, 0.5, -1)), (1, 0.5, 0))

    def test_torus(self):
        g = Torus((0, 0, 0), (0, 0, 1), 2.0, 0.5)
        np.testing.assert_allclose(closest_point(g, (3, 0, 0)), (2.5, 0, 0))
        np.testing.assert_allclose(closest_point(g, (2, 0, 1)), (2, 0, 0.5))
        # axis point: tie broken toward +x ring point
        np.testing.assert_allclose(closest_point(g, (0, 0, 0)), (1.5, 0, 0))

    def test_halfspace(self):
        g = HalfSpace((0, 0, 0.25), (0, 0, 1))
        np.testing.assert_allclose(closest_point(g, (0.5, 0.5, 0.5)), (0.5, 0.5, 0.25))


class TestClassifySphere:
    def test_fully_inside(self):
        assert classify_sphere(Sphere(), (0, 0, 0), 0.5) is SphereClass.FULLY_INSIDE

    def test_fully_outside(self):
        assert classify_sphere(Sphere(), (3, 0, 0), 0.5) is SphereClass.FULLY_OUTSIDE

    def test_center_on_surface(self):
        assert classify_sphere(Sphere(), (1, 0, 0), 0.5) is SphereClass.INTERSECTING

    def test_tangent_is_intersecting(self):
        assert classify_sphere(Sphere(), (3, 0, 0), 2.0) is SphereClass.INTERSECTING

    def test_negative_radius_rejected(self):
        with pytest.raises(ValueError):
            classify_sphere(Sphere(), (0, 0, 0), -1.0)

    @pytest.mark.parametrize("g", all_geometries(), ids=lambda g: type(g).__name__)
    def test_randomized_soundness(self, g, rng):
        # centers scattered around the surface so every class is populated
        surface = g.closest_point(rng.uniform(-1.5, 1.5, size=(1000, 3)))
        centers = surface + rng.normal(scale=0.3, size=(1000, 3))
        radii = rng.uniform(0.0, 0.3, size=1000)
        cls = g.classify_spheres(centers, radii)
        for cl in (SphereClass.FULLY_INSIDE, SphereClass.FULLY_OUTSIDE):
            idx = np.flatnonzero(cls == cl)
            assert len(idx) > 20
            for i in idx:
                d = rng.normal(size=(1000, 3))
                d /= np.linalg.norm(d, axis=1)[:, None]
                r = radii[i] * rng.uniform(size=1000) ** (1 / 3)
                inside = g.contains(centers[i] + r[:, None] * d)
                assert inside.all() if cl == SphereClass.FULLY_INSIDE else not inside.any()


class TestExactVolume:
    def test_unit_sphere(self):
        assert exact_volume(Sphere()) == pytest.approx(4.1887902, abs=1e-7)

    def test_verification_capsule(self):
        L = math.sqrt(3.0)
        expected = math.pi * 0.04 * L + 4.0 / 3.0 * math.pi * 0.008
        assert exact_volume(capsule()) == pytest.approx(expected, rel=1e-15)
        assert exact_volume(capsule()) == pytest.approx(0.2511662, abs=1e-7)

    def test_unit_box(self):
        assert exact_volume(Box((0, 0, 0), (1, 1, 1))) == 1.0

    def test_torus_and_scaled(self):
        t = Torus((0, 0, 0), (0, 0, 1), 2.0, 0.5)
        assert exact_volume(t) == pytest.approx(2 * math.pi**2 * 2.0 * 0.25)
        assert exact_volume(Transformed(Sphere(), scale=2.0)) == pytest.approx(8 * 4 / 3 * math.pi)

    def test_halfspace_has_none(self):
        with pytest.raises(NoAnalyticVolume):
            exact_volume(HalfSpace((0, 0, 0), (0, 0, 1)))

    @pytest.mark.parametrize("g", all_geometries(), ids=lambda g: type(g).__name__)
    def test_monte_carlo(self, g, rng):
        lo, hi = np.full(3, -2.5), np.full(3, 2.5)
        n = 1_000_000
        hits = g.contains(rng.uniform(lo, hi, size=(n, 3)))
        box = float(np.prod(hi - lo))
        p = hits.mean()
        sigma = box * math.sqrt(p * (1 - p) / n)
        assert abs(box * p - exact_volume(g)) <= 3 * sigma


class TestConstruction:
    def test_invalid(self):
        with pytest.raises(ValueError):
            Sphere(radius=0)
        with pytest.raises(ValueError):
            Capsule((0, 0, 0), (0, 0, 0), 1)
        with pytest.raises(ValueError):
            Box((0, 0, 0), (1, 0, 1))
        with pytest.raises(ValueError):
            Torus((0, 0, 0), (0, 0, 1), 0.5, 0.5)
        with pytest.raises(ValueError):
            Transformed(Sphere(), rotation=np.diag([1.0, 1.0, -1.0]))
        with pytest.raises(ValueError):
            Transformed(Sphere(), rotation=np.diag([1.0, 2.0, 1.0]))
        with pytest.raises(ValueError):
            Sphere(center=(np.nan, 0, 0))

    def test_from_config(self):
        g = from_config({"kind": "capsule", "a": A, "b": B, "radius": 0.2})
        assert isinstance(g, Capsule)
        g = from_config(
            {"kind": "sphere", "radius": 1, "transform": {"axis": (0, 0, 1), "angle": 0.3, "scale": 2}}
        )
        assert exact_volume(g) == pytest.approx(8 * 4 / 3 * math.pi)
        with pytest.raises(ValueError):
            from_config({"kind": "dodecahedron"})


@pytest.mark.parametrize("g", all_geometries(), ids=lambda g: type(g).__name__)
class TestProperties:
    def test_normal_offsets(self, g, rng):
        x = rng.uniform(-1.5, 1.5, size=(2000, 3))
        xp = g.closest_point(x)
        diff = x - xp
        dist = np.linalg.norm(diff, axis=1)
        keep = dist > 1e-3 * g.scale
        inside = g.contains(x[keep])
        normal = diff[keep] / dist[keep, None]
        normal[inside] *= -1.0
        eps = 1e-6 * g.scale
        base = xp[keep]
        if isinstance(g, Box):
            # the outward normal is ambiguous at edges and corners
            on_face = np.sum(np.isclose(base, g.lo) | np.isclose(base, g.hi), axis=1) == 1
            base, normal = base[on_face], normal[on_face]
        assert not g.contains(base + eps * normal).any()
        assert g.contains(base - eps * normal).all()

    def test_idempotence(self, g, rng):
        xp = g.closest_point(rng.uniform(-1.5, 1.5, size=(2000, 3)))
        again = g.closest_point(xp)
        assert np.max(np.linalg.norm(again - xp, axis=1)) <= 1e-10 * g.scale

    def test_distance_is_minimal(self, g, rng):
        x = rng.uniform(-1.5, 1.5, size=(200, 3))
        d = np.linalg.norm(x - g.closest_point(x), axis=1)
        # candidate surface points from projecting many other points
        cand = g.closest_point(rng.uniform(-2, 2, size=(20000, 3)))
        brute = np.min(np.linalg.norm(x[:, None, :] - cand[None, :, :], axis=2), axis=1)
        assert np.all(d <= brute + 1e-12)


class TestTransformed:
    def test_rigid_consistency(self, rng):
        inner = Capsule((0, 0, -0.5), (0.1, 0, 0.5), 0.3)
        g = Transformed.from_axis_angle(inner, (1, 2, 3), 1.1, (0.3, -0.2, 0.5))
        y = rng.uniform(-1, 1, size=(1000, 3))
        lhs = g.closest_point(g.forward(y))
        rhs = g.forward(inner.closest_point(y))
        assert np.max(np.abs(lhs - rhs)) <= 1e-9
        np.testing.assert_array_equal(g.contains(g.forward(y)), inner.contains(y))
