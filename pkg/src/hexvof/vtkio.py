"""
Legacy ASCII VTK unstructured-grid reading and writing for hex meshes.

VTK's hexahedron (cell type 12) uses the same corner order as
:class:`hexvof.hexmesh.HexMesh`.
"""
from __future__ import annotations

import io

import numpy as np

from .hexmesh import HexMesh

VTK_HEXAHEDRON = 12


def write_vtk(path, mesh, cell_data=None, title="hexvof volume fractions"):
    """
    Write ``mesh`` and optional per-cell scalars.

    Parameters
    ----------
    path : str or Path
    mesh : HexMesh
    cell_data : dict of str -> (ne,) float, optional
    """
    cell_data = cell_data or {}
    ne = len(mesh)
    buf = io.StringIO()
    buf.write("# vtk DataFile Version 3.0\n")
    buf.write(title.replace("\n", " ")[:255] + "\n")
    buf.write("ASCII\nDATASET UNSTRUCTURED_GRID\n")
    buf.write(f"POINTS {len(mesh.vertices)} double\n")
    np.savetxt(buf, mesh.vertices, fmt="%.17g")
    buf.write(f"CELLS {ne} {ne * 9}\n")
    cells = np.hstack([np.full((ne, 1), 8, dtype=np.int64), mesh.elements])
    np.savetxt(buf, cells, fmt="%d")
    buf.write(f"CELL_TYPES {ne}\n")
    np.savetxt(buf, np.full(ne, VTK_HEXAHEDRON), fmt="%d")
    if cell_data:
        buf.write(f"CELL_DATA {ne}\n")
        for name, values in cell_data.items():
            values = np.asarray(values, dtype=np.float64).reshape(-1)
            if len(values) != ne:
                raise ValueError(f"cell data {name!r} has {len(values)} values for {ne} cells")
            buf.write(f"SCALARS {name} double 1\nLOOKUP_TABLE default\n")
            np.savetxt(buf, values, fmt="%.17g")
    with open(path, "w") as fh:
        fh.write(buf.getvalue())


def read_vtk(path):
    """
    Read a file written by :func:`write_vtk`.

    Returns
    -------
    mesh : HexMesh
    cell_data : dict of str -> (ne,) float
    """
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines or not lines[0].startswith("# vtk DataFile"):
        raise ValueError(f"{path} is not a legacy VTK file")
    if lines[2].strip().upper() != "ASCII":
        raise ValueError("only ASCII legacy VTK is supported")
    tokens = " ".join(lines[3:]).split()
    pos = 0

    def take(n):
        nonlocal pos
        out = tokens[pos : pos + n]
        pos += n
        return out

    points = cells = types = None
    cell_data = {}
    while pos < len(tokens):
        key = take(1)[0].upper()
        if key == "DATASET":
            kind = take(1)[0].upper()
            if kind != "UNSTRUCTURED_GRID":
                raise ValueError(f"unsupported dataset {kind}")
        elif key == "POINTS":
            n, _ = take(2)
            points = np.array(take(3 * int(n)), dtype=np.float64).reshape(-1, 3)
        elif key == "CELLS":
            n, size = take(2)
            cells = np.array(take(int(size)), dtype=np.int64)
            n_cells = int(n)
        elif key == "CELL_TYPES":
            n = int(take(1)[0])
            types = np.array(take(n), dtype=np.int64)
        elif key == "CELL_DATA":
            take(1)
        elif key == "SCALARS":
            name, _dtype = take(2)
            if tokens[pos].upper() != "LOOKUP_TABLE":
                take(1)
            take(2)
            cell_data[name] = np.array(take(n_cells), dtype=np.float64)
        else:
            raise ValueError(f"unsupported VTK section {key}")
    if points is None or cells is None or types is None:
        raise ValueError("missing POINTS, CELLS or CELL_TYPES")
    if np.any(types != VTK_HEXAHEDRON):
        raise ValueError("only hexahedral cells are supported")
    cells = cells.reshape(n_cells, 9)
    if np.any(cells[:, 0] != 8):
        raise ValueError("hexahedral cells must list 8 vertices")
    return HexMesh(points, cells[:, 1:]), cell_data
