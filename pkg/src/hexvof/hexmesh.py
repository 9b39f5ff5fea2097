"""
hexmesh.py
----------

Unstructured hexahedral meshes with trilinear element maps.

Corner order follows :mod:`hexvof.clip`: counterclockwise bottom face
(zeta = -1) then counterclockwise top face (zeta = +1), seen from +zeta.
"""
from __future__ import annotations

import numpy as np

from .clip import hex_volume

#: reference-cube coordinates of the eight corners
REF_CORNERS = np.array(
    [
        [-1, -1, -1],
        [1, -1, -1],
        [1, 1, -1],
        [-1, 1, -1],
        [-1, -1, 1],
        [1, -1, 1],
        [1, 1, 1],
        [-1, 1, 1],
    ],
    dtype=np.float64,
)

# monomial basis [1, xi, eta, zeta, xi*eta, eta*zeta, xi*zeta, xi*eta*zeta]
_r, _s, _t = REF_CORNERS.T
_MONOMIALS = np.stack([np.ones(8), _r, _s, _t, _r * _s, _s * _t, _r * _t, _r * _s * _t])
#: maps corner coordinates to monomial coefficients of the trilinear map
MONOMIAL_FROM_CORNERS = _MONOMIALS / 8.0

# for each corner, the neighbour along xi, eta, zeta
_CORNER_NEIGHBORS = np.array(
    [
        [1, 3, 4],
        [0, 2, 5],
        [3, 1, 6],
        [2, 0, 7],
        [5, 7, 0],
        [4, 6, 1],
        [7, 5, 2],
        [6, 4, 3],
    ]
)


class MeshError(ValueError):
    """Invalid mesh construction input."""


class DegenerateElementError(MeshError):
    """An element has non-positive volume."""


class HexMesh:
    """
    Vertices plus 8-vertex element connectivity.

    Parameters
    ----------
    vertices : (nv, 3) float
    elements : (ne, 8) int
      Corner indices in canonical order.
    """

    def __init__(self, vertices, elements):
        vertices = np.array(vertices, dtype=np.float64)
        elements = np.array(elements, dtype=np.int64)
        if vertices.ndim != 2 or vertices.shape[1] != 3:
            raise MeshError("vertices must have shape (n, 3)")
        if elements.ndim != 2 or elements.shape[1] != 8:
            raise MeshError("elements must have shape (n, 8)")
        if not np.all(np.isfinite(vertices)):
            raise MeshError("vertex coordinates must be finite")
        if elements.size and (elements.min() < 0 or elements.max() >= len(vertices)):
            raise MeshError("element vertex index out of range")
        srt = np.sort(elements, axis=1)
        if np.any(srt[:, 1:] == srt[:, :-1]):
            raise MeshError("every element needs 8 distinct vertices")
        vertices.setflags(write=False)
        elements.setflags(write=False)
        self.vertices = vertices
        self.elements = elements
        self._cache = {}

    def __len__(self):
        return len(self.elements)

    @property
    def n_elements(self):
        return len(self.elements)

    def __repr__(self):
        return f"HexMesh(n_vertices={len(self.vertices)}, n_elements={len(self.elements)})"

    def corners(self, e=None):
        """Corner coordinates, ``(8, 3)`` for one element or ``(ne, 8, 3)``."""
        if e is None:
            if "corners" not in self._cache:
                c = self.vertices[self.elements]
                c.setflags(write=False)
                self._cache["corners"] = c
            return self._cache["corners"]
        return self.vertices[self.elements[e]]

    def coefficients(self):
        """Monomial coefficients of every element map, ``(ne, 8, 3)``."""
        if "coeffs" not in self._cache:
            c = corner_coefficients(self.corners())
            c.setflags(write=False)
            self._cache["coeffs"] = c
        return self._cache["coeffs"]

    def centroids(self):
        """Mean of the eight corners of every element."""
        if "centroids" not in self._cache:
            c = self.corners()
            total = c[:, 0].copy()
            for k in range(1, 8):
                total += c[:, k]
            total /= 8.0
            total.setflags(write=False)
            self._cache["centroids"] = total
        return self._cache["centroids"]

    def volumes(self, model="trilinear"):
        """
        Element volumes (unchecked).

        ``model="trilinear"`` integrates the Jacobian determinant of the
        element map exactly; ``model="polyhedral"`` sums the six Kuhn
        tetrahedra. The two agree for hexahedra with planar faces.
        """
        key = "volumes_" + model
        if key not in self._cache:
            if model == "trilinear":
                v = trilinear_hex_volume(self.corners())
            elif model == "polyhedral":
                v = hex_volume(self.corners())
            else:
                raise ValueError(f"unknown volume model {model!r}")
            v.setflags(write=False)
            self._cache[key] = v
        return self._cache[key]

    def check_volumes(self):
        """Raise :class:`DegenerateElementError` on any non-positive volume."""
        bad = np.flatnonzero((self.volumes() <= 0.0) | (self.volumes("polyhedral") <= 0.0))
        if len(bad):
            raise DegenerateElementError(
                f"{len(bad)} element(s) with non-positive volume, first is {bad[0]}"
            )
        return self

    def map_vertices(self, fn):
        """New mesh with ``fn`` applied to the ``(nv, 3)`` vertex array."""
        return HexMesh(fn(self.vertices.copy()), self.elements)


def build_box_mesh(lo, hi, n):
    """
    Axis-aligned structured mesh of ``[lo, hi]``.

    Parameters
    ----------
    lo, hi : (3,) float
    n : int or (3,) int
      Elements per axis.
    """
    lo = np.asarray(lo, dtype=np.float64).reshape(3)
    hi = np.asarray(hi, dtype=np.float64).reshape(3)
    counts = np.broadcast_to(np.asarray(n), (3,)).astype(np.int64)
    if np.any(counts < 1):
        raise MeshError("need at least one element per axis")
    if not np.all(lo < hi):
        raise MeshError("mesh bounds require lo < hi componentwise")
    nx, ny, nz = counts
    axes = [np.linspace(lo[d], hi[d], counts[d] + 1) for d in range(3)]
    # x varies fastest in both vertex and element numbering
    zz, yy, xx = np.meshgrid(axes[2], axes[1], axes[0], indexing="ij")
    vertices = np.stack([xx.ravel(), yy.ravel(), zz.ravel()], axis=1)

    def vid(i, j, k):
        return i + (nx + 1) * (j + (ny + 1) * k)

    k, j, i = np.meshgrid(np.arange(nz), np.arange(ny), np.arange(nx), indexing="ij")
    i, j, k = i.ravel(), j.ravel(), k.ravel()
    elements = np.stack(
        [
            vid(i, j, k),
            vid(i + 1, j, k),
            vid(i + 1, j + 1, k),
            vid(i, j + 1, k),
            vid(i, j, k + 1),
            vid(i + 1, j, k + 1),
            vid(i + 1, j + 1, k + 1),
            vid(i, j + 1, k + 1),
        ],
        axis=1,
    )
    return HexMesh(vertices, elements).check_volumes()


def _sinusoidal(v):
    x, y, z = v[:, 0], v[:, 1], v[:, 2]
    h = 0.5 * np.pi
    return np.stack(
        [
            x + 0.1 * np.sin(h * y * z),
            y + 0.1 * np.sin(h * x * z),
            z + 0.1 * np.sin(h * x * y),
        ],
        axis=1,
    )


def _shear_scaling(v):
    x, y, z = v[:, 0], v[:, 1], v[:, 2]
    return np.stack([x + 2.0 * y, 0.3 * y, 0.2 * z], axis=1)


def apply_sinusoidal_perturbation(mesh):
    """Move every vertex by ``0.1 sin(pi/2 * product of the other two coordinates)``."""
    return mesh.map_vertices(_sinusoidal)


def apply_shear_scaling(mesh):
    """Map ``(x, y, z) -> (x + 2y, 0.3y, 0.2z)``."""
    return mesh.map_vertices(_shear_scaling)


TRANSFORMS = {
    "sinusoidal": apply_sinusoidal_perturbation,
    "shear_scaling": apply_shear_scaling,
}


def monomials(xi):
    """Trilinear monomials at reference points, ``(..., 8)``."""
    xi = np.asarray(xi, dtype=np.float64)
    r, s, t = xi[..., 0], xi[..., 1], xi[..., 2]
    one = np.ones_like(r)
    return np.stack([one, r, s, t, r * s, s * t, r * t, r * s * t], axis=-1)


def evaluate_map(coeffs, xi):
    """
    Evaluate trilinear maps.

    Parameters
    ----------
    coeffs : (n, 8, 3) float
      Monomial coefficients, see :meth:`HexMesh.coefficients`.
    xi : (n, 3) float
      One reference point per map.

    Returns
    -------
    x : (n, 3) float
    """
    r, s, t = xi[:, 0:1], xi[:, 1:2], xi[:, 2:3]
    rs = r * s
    x = coeffs[:, 0] + r * coeffs[:, 1]
    x += s * coeffs[:, 2]
    x += t * coeffs[:, 3]
    x += rs * coeffs[:, 4]
    x += (s * t) * coeffs[:, 5]
    x += (r * t) * coeffs[:, 6]
    x += (rs * t) * coeffs[:, 7]
    return x


def evaluate_jacobian_det(coeffs, xi):
    """Determinant of the map derivative at reference points, ``(n,)``."""
    r, s, t = xi[:, 0:1], xi[:, 1:2], xi[:, 2:3]
    c = coeffs
    dr = c[:, 1] + s * c[:, 4] + t * c[:, 6] + (s * t) * c[:, 7]
    ds = c[:, 2] + r * c[:, 4] + t * c[:, 5] + (r * t) * c[:, 7]
    dt = c[:, 3] + s * c[:, 5] + r * c[:, 6] + (r * s) * c[:, 7]
    return (
        dr[:, 0] * (ds[:, 1] * dt[:, 2] - ds[:, 2] * dt[:, 1])
        - dr[:, 1] * (ds[:, 0] * dt[:, 2] - ds[:, 2] * dt[:, 0])
        + dr[:, 2] * (ds[:, 0] * dt[:, 1] - ds[:, 1] * dt[:, 0])
    )


_GAUSS = np.array(
    [[r, s, t] for t in (-1.0, 1.0) for s in (-1.0, 1.0) for r in (-1.0, 1.0)]
) / np.sqrt(3.0)


def corner_coefficients(corners):
    """Monomial coefficients ``(n, 8, 3)`` of hexahedra given by corners."""
    c = np.asarray(corners, dtype=np.float64)
    m = MONOMIAL_FROM_CORNERS
    out = np.empty(c.shape[:-2] + (8, 3))
    for i in range(8):
        acc = m[i, 0] * c[..., 0, :]
        for k in range(1, 8):
            acc = acc + m[i, k] * c[..., k, :]
        out[..., i, :] = acc
    return out


def trilinear_hex_volume(corners):
    """
    Exact volume of the trilinear image of the reference cube.

    The Jacobian determinant is at most quadratic in each reference
    variable, so two-point Gauss quadrature per axis integrates it
    exactly.
    """
    coeffs = corner_coefficients(corners).reshape(-1, 8, 3)
    total = np.zeros(len(coeffs))
    for q in _GAUSS:
        total += evaluate_jacobian_det(coeffs, np.broadcast_to(q, (len(coeffs), 3)))
    return total.reshape(np.shape(corners)[:-2])


def trilinear_map(mesh, e, xi):
    """Physical coordinate of reference point ``xi`` in element ``e``."""
    xi = np.asarray(xi, dtype=np.float64)
    pts = xi.reshape(-1, 3)
    coeffs = np.broadcast_to(mesh.coefficients()[e], (len(pts), 8, 3))
    x = evaluate_map(coeffs, pts)
    return x[0] if xi.ndim == 1 else x


def jacobian_det(mesh, e, xi):
    """Jacobian determinant of element ``e``'s map at ``xi``."""
    xi = np.asarray(xi, dtype=np.float64)
    pts = xi.reshape(-1, 3)
    coeffs = np.broadcast_to(mesh.coefficients()[e], (len(pts), 8, 3))
    d = evaluate_jacobian_det(coeffs, pts)
    return float(d[0]) if xi.ndim == 1 else d


def element_centroid(mesh, e):
    return mesh.centroids()[e]


def element_volume(mesh, e, model="trilinear"):
    """Volume of element ``e``; raises on a non-positive value."""
    v = float(mesh.volumes(model)[e])
    if v <= 0.0:
        raise DegenerateElementError(f"element {e} has non-positive volume {v}")
    return v


def quadrature_volume(mesh, order=2):
    """Element volumes by tensor Gauss quadrature of the Jacobian determinant."""
    pts, wts = np.polynomial.legendre.leggauss(order)
    grid = np.stack(np.meshgrid(pts, pts, pts, indexing="ij"), axis=-1).reshape(-1, 3)
    w = np.einsum("i,j,k->ijk", wts, wts, wts).ravel()
    coeffs = mesh.coefficients()
    total = np.zeros(len(mesh))
    for q, wq in zip(grid, w):
        total += wq * evaluate_jacobian_det(coeffs, np.broadcast_to(q, (len(mesh), 3)))
    return total


def scaled_jacobian(mesh, return_degenerate=False):
    """
    Scaled Jacobian quality of every element.

    The minimum over the eight corners of the normalized triple product
    of the three edges leaving the corner, each edge oriented along the
    positive reference direction. 1 is a perfect cube; non-positive
    values mean an inverted corner. Elements with a zero-length edge
    get quality 0.

    Parameters
    ----------
    mesh : HexMesh
    return_degenerate : bool
      Also return the mask of elements with a zero-length edge.
    """
    c = mesh.corners()
    signs = REF_CORNERS
    quality = np.full(len(mesh), np.inf)
    degenerate = np.zeros(len(mesh), dtype=bool)
    for a in range(8):
        u = [
            (c[:, _CORNER_NEIGHBORS[a, k]] - c[:, a]) * -signs[a, k]
            for k in range(3)
        ]
        det = np.einsum("ij,ij->i", u[0], np.cross(u[1], u[2]))
        norms = np.linalg.norm(u[0], axis=1) * np.linalg.norm(u[1], axis=1) * np.linalg.norm(u[2], axis=1)
        zero = norms == 0.0
        degenerate |= zero
        q = det / np.where(zero, 1.0, norms)
        quality = np.minimum(quality, q)
    quality[degenerate] = 0.0
    if return_degenerate:
        return quality, degenerate
    return quality
