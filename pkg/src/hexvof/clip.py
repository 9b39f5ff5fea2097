"""
clip.py
-------

Volume of a hexahedron (or tetrahedron) on the inner side of a plane.

A hexahedron is modelled as six tetrahedra sharing the diagonal from
corner 0 to corner 6 (Kuhn decomposition). Corner order is the
counterclockwise bottom face followed by the counterclockwise top face:

    7-------6
   /|      /|
  4-------5 |
  | 3-----|-2
  |/      |/
  0-------1

With a consistent corner order the quad faces of neighbouring cells are
split along the same diagonal, so clipped pieces of sibling cells tile
without gaps.
"""
from __future__ import annotations

import numpy as np

#: six positively oriented tetrahedra of the unit cube, by corner index
KUHN_TETS = np.array(
    [
        [0, 1, 2, 6],
        [0, 5, 1, 6],
        [0, 2, 3, 6],
        [0, 3, 7, 6],
        [0, 4, 5, 6],
        [0, 7, 4, 6],
    ]
)

#: corners within this fraction of the cell diameter snap onto the plane
SNAP = 1e-12


def tet_volume(p0, p1, p2, p3):
    """Signed volume of tetrahedra given ``(..., 3)`` vertex arrays."""
    a = p1 - p0
    b = p2 - p0
    c = p3 - p0
    det = (
        a[..., 0] * (b[..., 1] * c[..., 2] - b[..., 2] * c[..., 1])
        - a[..., 1] * (b[..., 0] * c[..., 2] - b[..., 2] * c[..., 0])
        + a[..., 2] * (b[..., 0] * c[..., 1] - b[..., 1] * c[..., 0])
    )
    return det / 6.0


def hex_to_tets(corners):
    """
    Split hexahedra into their six Kuhn tetrahedra.

    Parameters
    ----------
    corners : (8, 3) or (n, 8, 3) float

    Returns
    -------
    tets : (6, 4, 3) or (n, 6, 4, 3) float
    """
    corners = np.asarray(corners, dtype=np.float64)
    return corners[..., KUHN_TETS, :]


def hex_tet_volumes(corners):
    """Signed volumes of the six tetrahedra, shape ``(..., 6)``."""
    corners = np.asarray(corners, dtype=np.float64)
    t = KUHN_TETS
    return tet_volume(
        corners[..., t[:, 0], :],
        corners[..., t[:, 1], :],
        corners[..., t[:, 2], :],
        corners[..., t[:, 3], :],
    )


def _ordered_sum(values):
    # left-to-right along the last axis so results never depend on batch size
    total = values[..., 0].copy()
    for i in range(1, values.shape[-1]):
        total += values[..., i]
    return total


def hex_volume(corners):
    """Volume of hexahedra under the six-tetrahedron model."""
    return _ordered_sum(hex_tet_volumes(corners))


def kept_fraction(s):
    """
    Fraction of a tetrahedron where a linear function is non-positive.

    Parameters
    ----------
    s : (n, 4) float
      Function values at the four vertices. Values already snapped
      to exactly zero count as kept.

    Returns
    -------
    frac : (n,) float
      In [0, 1]; depends only on the vertex values.
    """
    s = np.sort(np.asarray(s, dtype=np.float64), axis=-1)
    s0, s1, s2, s3 = s[..., 0], s[..., 1], s[..., 2], s[..., 3]
    kept = np.count_nonzero(s <= 0.0, axis=-1)
    frac = np.where(kept == 4, 1.0, 0.0)

    one = kept == 1
    if one.any():
        a, b, c, d = s0[one], s1[one], s2[one], s3[one]
        frac[one] = (a / (a - b)) * (a / (a - c)) * (a / (a - d))

    three = kept == 3
    if three.any():
        a, b, c, d = s0[three], s1[three], s2[three], s3[three]
        frac[three] = 1.0 - (d / (d - a)) * (d / (d - b)) * (d / (d - c))

    two = kept == 2
    if two.any():
        # kept part is a prism between edges (0,1) and the cut points
        u, v, w, x = s0[two], s1[two], s2[two], s3[two]
        alpha = u / (u - w)
        beta = u / (u - x)
        gamma = v / (v - w)
        delta = v / (v - x)
        frac[two] = alpha * beta * (1.0 - delta) + alpha * (1.0 - gamma) * delta + gamma * delta
    return frac


def _plane_values(points, origin, normal, diameter):
    s = np.einsum("...j,...j->...", points - origin, normal)
    tol = SNAP * diameter
    return np.where(np.abs(s) <= tol, 0.0, s)


def _bbox_diameter(points):
    span = points.max(axis=-2) - points.min(axis=-2)
    return np.sqrt(np.einsum("...j,...j->...", span, span))


def clipped_tet_volume(tet, point, normal):
    """
    Volume of ``tet`` on the side ``(x - point) . normal <= 0``.

    Parameters
    ----------
    tet : (4, 3) or (n, 4, 3) float
    point, normal : (3,) or (n, 3) float
      ``normal`` must be a unit vector.
    """
    tet = np.asarray(tet, dtype=np.float64)
    single = tet.ndim == 2
    tet = tet.reshape(-1, 4, 3)
    point = np.broadcast_to(np.asarray(point, dtype=np.float64), (len(tet), 3))
    normal = np.broadcast_to(np.asarray(normal, dtype=np.float64), (len(tet), 3))
    diam = _bbox_diameter(tet)
    s = _plane_values(tet, point[:, None, :], normal[:, None, :], diam[:, None])
    vol = tet_volume(tet[:, 0], tet[:, 1], tet[:, 2], tet[:, 3]) * kept_fraction(s)
    return float(vol[0]) if single else vol


def clipped_hex_volume(corners, point, normal):
    """
    Volume of hexahedra on the side ``(x - point) . normal <= 0``.

    Parameters
    ----------
    corners : (8, 3) or (n, 8, 3) float
      Corners in canonical order.
    point : (3,) or (n, 3) float
      A point on each plane.
    normal : (3,) or (n, 3) float
      Unit normals pointing away from the kept side.

    Returns
    -------
    volume : float or (n,) float
      Sum of the clipped volumes of the six Kuhn tetrahedra.
    """
    corners = np.asarray(corners, dtype=np.float64)
    single = corners.ndim == 2
    corners = corners.reshape(-1, 8, 3)
    n = len(corners)
    point = np.broadcast_to(np.asarray(point, dtype=np.float64), (n, 3))
    normal = np.broadcast_to(np.asarray(normal, dtype=np.float64), (n, 3))

    diam = _bbox_diameter(corners)
    s = _plane_values(corners, point[:, None, :], normal[:, None, :], diam[:, None])
    tet_vols = hex_tet_volumes(corners)
    frac = kept_fraction(s[:, KUHN_TETS].reshape(-1, 4)).reshape(n, 6)
    vol = _ordered_sum(tet_vols * frac)
    return float(vol[0]) if single else vol
