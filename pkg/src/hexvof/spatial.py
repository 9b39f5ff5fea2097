"""
spatial.py
----------

k-d tree over element centroids built by recursive coordinate
bisection. Every node stores a sphere covering all vertices of its
elements, so a whole subtree can be classified against a solid at once.

The tree is stored as flat arrays. Elements of a node are the slice
``perm[start[i]:end[i]]``; leaves hold exactly one element.
"""
from __future__ import annotations

import numpy as np


class KdTree:
    """
    Flat-array k-d tree.

    Attributes
    ----------
    perm : (ne,) int
      Element indices, ordered so each node owns a contiguous slice.
    start, end : (nn,) int
      Slice bounds of each node into ``perm``.
    left, right : (nn,) int
      Child node ids, -1 at leaves.
    axis : (nn,) int
      Split axis, -1 at leaves.
    split : (nn,) float
      Mean centroid coordinate along ``axis`` (NaN at leaves).
    center, radius : (nn, 3), (nn,) float
      Bounding sphere of each node.
    depth : (nn,) int
      Root has depth 0.
    """

    def __init__(self, perm, start, end, left, right, axis, split, center, radius, depth):
        self.perm = perm
        self.start = start
        self.end = end
        self.left = left
        self.right = right
        self.axis = axis
        self.split = split
        self.center = center
        self.radius = radius
        self.depth = depth
        for arr in vars(self).values():
            arr.setflags(write=False)

    root = 0

    @property
    def n_nodes(self):
        return len(self.start)

    @property
    def n_elements(self):
        return len(self.perm)

    @property
    def max_depth(self):
        return int(self.depth.max())

    def is_leaf(self, node):
        return self.left[node] < 0

    def elements(self, node):
        return self.perm[self.start[node] : self.end[node]]

    def size(self, node):
        return int(self.end[node] - self.start[node])

    def leaves(self):
        return np.flatnonzero(self.left < 0)

    def __repr__(self):
        return f"KdTree(n_elements={self.n_elements}, n_nodes={self.n_nodes}, depth={self.max_depth})"


def _segments(starts, sizes):
    """Concatenated ``range(start, start + size)`` plus segment offsets."""
    offsets = np.zeros(len(sizes), dtype=np.int64)
    np.cumsum(sizes[:-1], out=offsets[1:])
    pos = np.arange(int(sizes.sum()), dtype=np.int64)
    pos += np.repeat(starts - offsets, sizes)
    return pos, offsets


def _covering_spheres(points, offsets, sizes):
    """bbox-midpoint spheres of consecutive point groups."""
    lo = np.minimum.reduceat(points, offsets, axis=0)
    hi = np.maximum.reduceat(points, offsets, axis=0)
    center = 0.5 * (lo + hi)
    diff = points - np.repeat(center, sizes, axis=0)
    d2 = np.einsum("ij,ij->i", diff, diff)
    radius = np.sqrt(np.maximum.reduceat(d2, offsets))
    return center, radius


def bounding_sphere(points):
    """
    Sphere centered at the bounding-box midpoint of ``points`` whose
    radius reaches the farthest point.
    """
    points = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    center, radius = _covering_spheres(points, np.array([0]), np.array([len(points)]))
    return center[0], float(radius[0])


def bounding_sphere_of_elements(mesh, elems):
    """Covering sphere of all vertices of the listed elements."""
    elems = np.atleast_1d(np.asarray(elems, dtype=np.int64))
    if len(elems) == 0:
        raise ValueError("need at least one element")
    return bounding_sphere(mesh.corners()[elems].reshape(-1, 3))


def build_kdtree(mesh):
    """
    Build the tree by recursive coordinate bisection.

    Each internal node splits along the axis of largest centroid extent
    (lowest axis on ties) at the mean centroid coordinate. Elements at or
    below the mean go left; when coincident coordinates would unbalance
    the split, the cut is moved to keep child sizes within one of each
    other.
    """
    centroids = mesh.centroids()
    ne = len(centroids)
    if ne == 0:
        raise ValueError("cannot build a k-d tree over an empty mesh")

    perm = np.arange(ne, dtype=np.int64)
    start, end, left, right, axis, split, depth = ([] for _ in range(7))

    def add_nodes(s, e, d):
        first = len(start)
        start.extend(s.tolist())
        end.extend(e.tolist())
        left.extend([-1] * len(s))
        right.extend([-1] * len(s))
        axis.extend([-1] * len(s))
        split.extend([np.nan] * len(s))
        depth.extend([d] * len(s))
        return np.arange(first, first + len(s))

    level = add_nodes(np.array([0]), np.array([ne]), 0)
    d = 0
    while len(level):
        s = np.asarray([start[i] for i in level], dtype=np.int64)
        e = np.asarray([end[i] for i in level], dtype=np.int64)
        inner = (e - s) > 1
        level, s, e = level[inner], s[inner], e[inner]
        if not len(level):
            break
        sizes = e - s
        pos, offsets = _segments(s, sizes)
        c = centroids[perm[pos]]
        extent = np.maximum.reduceat(c, offsets, axis=0) - np.minimum.reduceat(c, offsets, axis=0)
        ax = np.argmax(extent, axis=1)
        key = c[np.arange(len(c)), np.repeat(ax, sizes)]
        mean = np.add.reduceat(key, offsets) / sizes

        seg = np.repeat(np.arange(len(level)), sizes)
        order = np.lexsort((key, seg))
        perm[pos] = perm[pos][order]
        below = np.add.reduceat((key <= np.repeat(mean, sizes)).astype(np.int64), offsets)
        half = sizes // 2
        n_left = np.clip(below, half, sizes - half)

        d += 1
        lchild = add_nodes(s, s + n_left, d)
        rchild = add_nodes(s + n_left, e, d)
        for i, node in enumerate(level):
            left[node] = lchild[i]
            right[node] = rchild[i]
            axis[node] = ax[i]
            split[node] = mean[i]
        level = np.concatenate([lchild, rchild])

    start = np.asarray(start, dtype=np.int64)
    end = np.asarray(end, dtype=np.int64)
    depth = np.asarray(depth, dtype=np.int64)

    # spheres level by level; nodes at one depth own disjoint slices
    corners = mesh.corners()[perm]
    center = np.empty((len(start), 3))
    radius = np.empty(len(start))
    for lvl in range(int(depth.max()) + 1):
        nodes = np.flatnonzero(depth == lvl)
        sizes = end[nodes] - start[nodes]
        pos, offsets = _segments(start[nodes], sizes)
        pts = corners[pos].reshape(-1, 3)
        center[nodes], radius[nodes] = _covering_spheres(pts, offsets * 8, sizes * 8)

    return KdTree(
        perm,
        start,
        end,
        np.asarray(left, dtype=np.int64),
        np.asarray(right, dtype=np.int64),
        np.asarray(axis, dtype=np.int64),
        np.asarray(split, dtype=np.float64),
        center,
        radius,
        depth,
    )
