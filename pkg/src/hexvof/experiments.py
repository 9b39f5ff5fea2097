"""
Mesh/geometry setups and the studies the command line runs.
"""
from __future__ import annotations

import csv
import time
from dataclasses import dataclass, field

import numpy as np

from .geometry import Capsule, Sphere
from .hexmesh import TRANSFORMS, build_box_mesh, scaled_jacobian
from .insertion import InsertionConfig, insert_geometry, total_volume
from .spatial import build_kdtree

CSV_HEADER = ["n_sub", "n_s", "rel_error", "seconds"]


@dataclass
class MeshSpec:
    lo: tuple = (-2.0, -2.0, -2.0)
    hi: tuple = (2.0, 2.0, 2.0)
    n: int = 32
    transforms: list = field(default_factory=list)

    def __post_init__(self):
        unknown = [t for t in self.transforms if t not in TRANSFORMS]
        if unknown:
            raise ValueError(f"unknown transform(s) {unknown}; choose from {sorted(TRANSFORMS)}")

    def build(self, check=True):
        """Generate the mesh; ``check`` rejects non-positive element volumes."""
        mesh = build_box_mesh(self.lo, self.hi, self.n)
        for name in self.transforms:
            mesh = TRANSFORMS[name](mesh)
        return mesh.check_volumes() if check else mesh


def verification_sphere():
    return Sphere((0.0, 0.0, 0.0), 1.0)


def verification_capsule():
    return Capsule((-0.51, -0.49, -0.52), (0.49, 0.51, 0.48), 0.2)


def poor_quality_mesh_spec():
    return MeshSpec((-10.0,) * 3, (10.0,) * 3, 32, ["sinusoidal", "shear_scaling"])


def fmt(value):
    """Floats with 17 significant digits; other values as-is."""
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.17g}"
    return str(value)


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(row[k]) for k in header])


def fit_slope(n_subs, errors):
    """
    Least-squares slope of ``log(error)`` against ``log(2**-n_sub)``.

    Returns ``None`` for fewer than two points.
    """
    n_subs = np.asarray(n_subs, dtype=np.float64)
    errors = np.asarray(errors, dtype=np.float64)
    if len(n_subs) < 2:
        return None
    slope, _ = np.polyfit(np.log(2.0**-n_subs), np.log(errors), 1)
    return float(slope)


def convergence_study(mesh, g, n_subs, method="amr", threads=1, tree=None):
    """
    Relative volume error for each subdivision count.

    Returns
    -------
    rows : list of dict
      Keys ``n_sub, n_s, rel_error, seconds`` plus ``stats`` and ``field``.
    slope : float or None
      Fitted over the last three rows.
    """
    exact = g.volume()
    if tree is None:
        tree = build_kdtree(mesh)
    rows = []
    for n_sub in n_subs:
        cfg = InsertionConfig(n_sub=int(n_sub), method=method, threads=threads)
        t0 = time.perf_counter()
        vf, stats = insert_geometry(mesh, tree, g, cfg)
        seconds = time.perf_counter() - t0
        rows.append(
            {
                "n_sub": int(n_sub),
                "n_s": 8 ** int(n_sub),
                "rel_error": abs(exact - total_volume(vf, mesh)) / exact,
                "seconds": seconds,
                "stats": stats,
                "field": vf,
            }
        )
    tail = rows[-3:]
    slope = fit_slope([r["n_sub"] for r in tail], [r["rel_error"] for r in tail])
    return rows, slope


QUALITY_BAND = (0.014, 0.1)
QUALITY_BINS = [-np.inf, 0.0, 1e-4, 1e-3, 1e-2, 1e-1, 1.0 + 1e-12]


def quality_report(mesh):
    """
    Scaled-Jacobian summary.

    Returns a dict with ``min``, ``max``, ``band_fraction`` (share of
    elements with quality in [0.014, 0.1]), ``degenerate`` count and a
    per-decade ``histogram`` of ``(lo, hi, count)`` rows.
    """
    q, degenerate = scaled_jacobian(mesh, return_degenerate=True)
    counts, _ = np.histogram(q, bins=QUALITY_BINS)
    lo, hi = QUALITY_BAND
    return {
        "min": float(q.min()),
        "max": float(q.max()),
        "band_fraction": float(np.mean((q >= lo) & (q <= hi))),
        "degenerate": int(degenerate.sum()),
        "histogram": [
            {"bin_lo": float(a), "bin_hi": float(min(b, 1.0)), "count": int(c)}
            for a, b, c in zip(QUALITY_BINS[:-1], QUALITY_BINS[1:], counts)
        ],
        "quality": q,
    }
