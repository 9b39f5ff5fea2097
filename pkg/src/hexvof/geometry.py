"""
geometry.py
-----------

Implicit solids that answer the two queries volume-fraction insertion
needs: point containment and closest point on the boundary.

Every query is vectorized: pass a ``(3,)`` point or an ``(n, 3)`` array.
Boundary points count as inside.
"""
from __future__ import annotations

import enum
import math

import numpy as np

# tie-break order for symmetry-degenerate closest-point queries
_PRIORITY = np.eye(3)


class NoAnalyticVolume(ValueError):
    """Raised when a geometry has no closed-form volume."""


class SphereClass(enum.IntEnum):
    FULLY_OUTSIDE = 0
    FULLY_INSIDE = 1
    INTERSECTING = 2


def _as_point(value, name="point"):
    arr = np.asarray(value, dtype=np.float64).reshape(3)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite, got {arr}")
    return arr


def _normalize(v, name="vector"):
    v = _as_point(v, name)
    n = np.linalg.norm(v)
    if n == 0.0:
        raise ValueError(f"{name} must be nonzero")
    return v / n


_TIE_TOL = 1e-13


def _perpendicular(axis):
    """First priority axis not parallel to ``axis``, orthogonalized."""
    for e in _PRIORITY:
        d = e - np.dot(e, axis) * axis
        n = np.linalg.norm(d)
        if n > 1e-8:
            return d / n
    raise AssertionError("unreachable")


def _radial(vec, fallback, tol=0.0):
    """
    Normalize rows of ``vec``; rows no longer than ``tol`` take ``fallback``.

    Returns
    -------
    unit : (n, 3) float
    length : (n,) float
    """
    length = np.sqrt(np.einsum("ij,ij->i", vec, vec))
    degenerate = length <= tol
    safe = np.where(degenerate, 1.0, length)
    unit = vec / safe[:, None]
    if degenerate.any():
        unit[degenerate] = fallback
    return unit, length


class Geometry:
    """
    Base class for an implicit solid.

    Subclasses implement ``_contains`` and ``_closest`` on ``(n, 3)``
    arrays; the public methods accept single points too.
    """

    #: length scale used for relative tolerances
    scale: float = 1.0

    def contains(self, x):
        x = np.asarray(x, dtype=np.float64)
        if x.ndim == 1:
            return bool(self._contains(x[None, :])[0])
        return self._contains(x)

    def closest_point(self, x):
        x = np.asarray(x, dtype=np.float64)
        if x.ndim == 1:
            return self._closest(x[None, :])[0]
        return self._closest(x)

    def classify_spheres(self, centers, radii):
        """
        Classify spheres against the solid.

        Parameters
        ----------
        centers : (n, 3) float
        radii : (n,) float

        Returns
        -------
        cls : (n,) int8
          Values of :class:`SphereClass`. A sphere whose surface
          distance equals its radius counts as intersecting.
        """
        centers = np.asarray(centers, dtype=np.float64)
        radii = np.asarray(radii, dtype=np.float64)
        diff = centers - self._closest(centers)
        d = np.sqrt(np.einsum("ij,ij->i", diff, diff))
        inside = self._contains(centers)
        out = np.full(len(centers), SphereClass.INTERSECTING, dtype=np.int8)
        clear = d > radii
        out[clear & inside] = SphereClass.FULLY_INSIDE
        out[clear & ~inside] = SphereClass.FULLY_OUTSIDE
        return out

    def volume(self):
        raise NoAnalyticVolume(f"{type(self).__name__} has no analytic volume")

    def _contains(self, x):
        raise NotImplementedError

    def _closest(self, x):
        raise NotImplementedError


class Sphere(Geometry):
    def __init__(self, center=(0.0, 0.0, 0.0), radius=1.0):
        self.center = _as_point(center, "center")
        self.radius = float(radius)
        if not self.radius > 0.0:
            raise ValueError("sphere radius must be positive")
        self.scale = self.radius

    def _contains(self, x):
        d = x - self.center
        return np.einsum("ij,ij->i", d, d) <= self.radius**2

    def _closest(self, x):
        unit, _ = _radial(x - self.center, _PRIORITY[0])
        return self.center + self.radius * unit

    def volume(self):
        return 4.0 / 3.0 * math.pi * self.radius**3

    def __repr__(self):
        return f"Sphere(center={self.center.tolist()}, radius={self.radius})"


class Capsule(Geometry):
    """All points within ``radius`` of the segment from ``a`` to ``b``."""

    def __init__(self, a, b, radius):
        self.a = _as_point(a, "a")
        self.b = _as_point(b, "b")
        self.radius = float(radius)
        if not self.radius > 0.0:
            raise ValueError("capsule radius must be positive")
        axis = self.b - self.a
        self.length = float(np.linalg.norm(axis))
        if self.length == 0.0:
            raise ValueError("capsule endpoints must differ")
        self.axis = axis / self.length
        self._tie = _perpendicular(self.axis)
        self.scale = max(self.radius, self.length)

    def _axis_point(self, x):
        t = np.clip((x - self.a) @ self.axis, 0.0, self.length)
        return self.a + t[:, None] * self.axis

    def _contains(self, x):
        d = x - self._axis_point(x)
        return np.einsum("ij,ij->i", d, d) <= self.radius**2

    def _closest(self, x):
        q = self._axis_point(x)
        # rounding leaves axis points a few ulps off the axis
        unit, _ = _radial(x - q, self._tie, _TIE_TOL * self.scale)
        return q + self.radius * unit

    def volume(self):
        r = self.radius
        return math.pi * r * r * self.length + 4.0 / 3.0 * math.pi * r**3

    def __repr__(self):
        return f"Capsule(a={self.a.tolist()}, b={self.b.tolist()}, radius={self.radius})"


class Box(Geometry):
    def __init__(self, lo, hi):
        self.lo = _as_point(lo, "lo")
        self.hi = _as_point(hi, "hi")
        if not np.all(self.lo < self.hi):
            raise ValueError("box requires lo < hi componentwise")
        self.scale = float(np.max(self.hi - self.lo))

    def _contains(self, x):
        return np.all((x >= self.lo) & (x <= self.hi), axis=1)

    def _closest(self, x):
        out = np.clip(x, self.lo, self.hi)
        inside = self._contains(x)
        if inside.any():
            xi = x[inside]
            # face order +x, +y, +z, -x, -y, -z; argmin keeps the first tie
            gaps = np.concatenate([self.hi - xi, xi - self.lo], axis=1)
            face = np.argmin(gaps, axis=1)
            axis = face % 3
            rows = np.arange(len(xi))
            proj = xi.copy()
            proj[rows, axis] = np.where(face < 3, self.hi[axis], self.lo[axis])
            out[inside] = proj
        return out

    def volume(self):
        return float(np.prod(self.hi - self.lo))

    def __repr__(self):
        return f"Box(lo={self.lo.tolist()}, hi={self.hi.tolist()})"


class Torus(Geometry):
    def __init__(self, center, axis, major_radius, minor_radius):
        self.center = _as_point(center, "center")
        self.axis = _normalize(axis, "axis")
        self.major_radius = float(major_radius)
        self.minor_radius = float(minor_radius)
        if not self.major_radius > self.minor_radius > 0.0:
            raise ValueError("torus requires major_radius > minor_radius > 0")
        self._tie = _perpendicular(self.axis)
        self.scale = self.major_radius + self.minor_radius

    def _ring_point(self, x):
        w = x - self.center
        h = w @ self.axis
        rho, _ = _radial(w - h[:, None] * self.axis, self._tie, _TIE_TOL * self.scale)
        return self.center + self.major_radius * rho, rho

    def _contains(self, x):
        q, _ = self._ring_point(x)
        d = x - q
        return np.einsum("ij,ij->i", d, d) <= self.minor_radius**2

    def _closest(self, x):
        q, rho = self._ring_point(x)
        diff = x - q
        length = np.sqrt(np.einsum("ij,ij->i", diff, diff))
        degenerate = length <= _TIE_TOL * self.scale
        unit = np.where(degenerate[:, None], rho, diff / np.where(degenerate, 1.0, length)[:, None])
        return q + self.minor_radius * unit

    def volume(self):
        return 2.0 * math.pi**2 * self.major_radius * self.minor_radius**2

    def __repr__(self):
        return (
            f"Torus(center={self.center.tolist()}, axis={self.axis.tolist()}, "
            f"major_radius={self.major_radius}, minor_radius={self.minor_radius})"
        )


class HalfSpace(Geometry):
    """
    The unbounded solid ``(x - point) . normal <= 0``.

    Useful for exact plane-cut checks; it has no finite volume.
    """

    def __init__(self, point, normal):
        self.point = _as_point(point, "point")
        self.normal = _normalize(normal, "normal")

    def _contains(self, x):
        return (x - self.point) @ self.normal <= 0.0

    def _closest(self, x):
        h = (x - self.point) @ self.normal
        return x - h[:, None] * self.normal

    def __repr__(self):
        return f"HalfSpace(point={self.point.tolist()}, normal={self.normal.tolist()})"


class Transformed(Geometry):
    """
    ``inner`` moved by ``x -> scale * rotation @ x + translation``.

    Only proper rotations and uniform scales are accepted so distances
    (and hence closest points) map exactly.
    """

    def __init__(self, inner, rotation=None, translation=(0.0, 0.0, 0.0), scale=1.0):
        if not isinstance(inner, Geometry):
            raise TypeError("inner must be a Geometry")
        rot = np.eye(3) if rotation is None else np.asarray(rotation, dtype=np.float64)
        if rot.shape != (3, 3):
            raise ValueError("rotation must be a 3x3 matrix")
        if not np.allclose(rot @ rot.T, np.eye(3), atol=1e-12) or np.linalg.det(rot) <= 0.0:
            raise ValueError("rotation must be a proper orthogonal matrix")
        if not float(scale) > 0.0:
            raise ValueError("scale must be positive")
        self.inner = inner
        self.rotation = rot
        self.translation = _as_point(translation, "translation")
        self.factor = float(scale)
        self.scale = self.factor * inner.scale

    @classmethod
    def from_axis_angle(cls, inner, axis, angle, translation=(0.0, 0.0, 0.0), scale=1.0):
        from scipy.spatial.transform import Rotation

        rotvec = _normalize(axis, "axis") * float(angle)
        return cls(inner, Rotation.from_rotvec(rotvec).as_matrix(), translation, scale)

    def forward(self, y):
        return self.factor * (np.asarray(y) @ self.rotation.T) + self.translation

    def inverse(self, x):
        return ((np.asarray(x) - self.translation) @ self.rotation) / self.factor

    def _contains(self, x):
        return self.inner._contains(self.inverse(x))

    def _closest(self, x):
        return self.forward(self.inner._closest(self.inverse(x)))

    def volume(self):
        return self.factor**3 * self.inner.volume()

    def __repr__(self):
        return f"Transformed({self.inner!r}, scale={self.factor})"


def contains(g, x):
    """True where ``x`` lies in the closed solid ``g``."""
    return g.contains(x)


def closest_point(g, x):
    """Closest point on the boundary of ``g`` to ``x``."""
    return g.closest_point(x)


def classify_sphere(g, center, radius):
    """Classify one sphere; see :meth:`Geometry.classify_spheres`."""
    if radius < 0:
        raise ValueError("radius must be non-negative")
    c = _as_point(center, "center")[None, :]
    return SphereClass(int(g.classify_spheres(c, np.array([float(radius)]))[0]))


def exact_volume(g):
    """Analytic volume of ``g``; raises :class:`NoAnalyticVolume` if unknown."""
    return g.volume()


def from_config(cfg):
    """
    Build a geometry from a flat mapping such as
    ``{"kind": "sphere", "center": [0, 0, 0], "radius": 1}``.

    A ``transform`` entry with ``rotation``/``axis``+``angle``,
    ``translation`` and ``scale`` wraps the primitive.
    """
    cfg = dict(cfg)
    kind = str(cfg.pop("kind", "")).lower()
    transform = cfg.pop("transform", None)
    if kind == "sphere":
        g = Sphere(cfg.get("center", (0.0, 0.0, 0.0)), cfg.get("radius", 1.0))
    elif kind == "capsule":
        g = Capsule(cfg["a"], cfg["b"], cfg["radius"])
    elif kind == "box":
        g = Box(cfg["lo"], cfg["hi"])
    elif kind == "torus":
        g = Torus(
            cfg.get("center", (0.0, 0.0, 0.0)),
            cfg.get("axis", (0.0, 0.0, 1.0)),
            cfg["major_radius"],
            cfg["minor_radius"],
        )
    elif kind == "halfspace":
        g = HalfSpace(cfg["point"], cfg["normal"])
    else:
        raise ValueError(f"unknown geometry kind {kind!r}")
    if transform:
        t = dict(transform)
        if "axis" in t:
            g = Transformed.from_axis_angle(
                g, t["axis"], t.get("angle", 0.0), t.get("translation", (0, 0, 0)), t.get("scale", 1.0)
            )
        else:
            g = Transformed(g, t.get("rotation"), t.get("translation", (0, 0, 0)), t.get("scale", 1.0))
    return g
