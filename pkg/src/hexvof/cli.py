"""
Command line interface.

    hexvof insert   --geom sphere --radius 1 --nsub 2 --out-vtk vf.vtk
    hexvof converge --geom capsule --a ... --nsub-range 0..5 --out-csv conv.csv
    hexvof quality  --mesh-lo -10,-10,-10 --mesh-hi 10,10,10 \
                    --transform sinusoidal --transform shear_scaling
"""
from __future__ import annotations

import argparse
import json
import re
import sys
import time
from pathlib import Path

from . import geometry
from .experiments import CSV_HEADER, MeshSpec, convergence_study, fmt, quality_report, write_csv
from .insertion import MAX_SUBDIVISIONS, InsertionConfig, insert_geometry, total_volume
from .spatial import build_kdtree
from .vtkio import write_vtk


class SpecError(ValueError):
    """Invalid experiment specification."""


def parse_vec3(text):
    try:
        vals = [float(v) for v in str(text).split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected X,Y,Z, got {text!r}")
    if len(vals) != 3:
        raise argparse.ArgumentTypeError(f"expected three comma-separated values, got {text!r}")
    return tuple(vals)


def parse_range(text):
    """``"0..5"`` -> ``[0, 1, 2, 3, 4, 5]``; a single integer is a one-item range."""
    text = str(text)
    if ".." in text:
        a, b = text.split("..", 1)
        lo, hi = int(a), int(b)
    else:
        lo = hi = int(text)
    if hi < lo:
        raise argparse.ArgumentTypeError(f"empty n_sub range {text!r}")
    return list(range(lo, hi + 1))


GEOM_KEYS = ("center", "radius", "a", "b", "lo", "hi", "axis", "major_radius", "minor_radius", "point", "normal")


def _load_config(path):
    if path is None:
        return {}
    with open(path) as fh:
        return json.load(fh)


def geometry_from_args(args, cfg):
    spec = dict(cfg.get("geometry", {}))
    if args.geom:
        spec = {"kind": args.geom}
    for key in GEOM_KEYS:
        val = getattr(args, key, None)
        if val is not None:
            spec[key] = val
    if "kind" not in spec:
        raise SpecError("no geometry given; use --geom or a config file")
    try:
        return geometry.from_config(spec)
    except (KeyError, TypeError) as exc:
        raise SpecError(f"incomplete {spec.get('kind')} geometry: missing {exc}") from exc


def mesh_from_args(args, cfg):
    spec = dict(cfg.get("mesh", {}))
    if args.mesh_lo is not None:
        spec["lo"] = args.mesh_lo
    if args.mesh_hi is not None:
        spec["hi"] = args.mesh_hi
    if args.mesh_n is not None:
        spec["n"] = args.mesh_n
    if args.transform:
        spec["transforms"] = args.transform
    return MeshSpec(
        tuple(spec.get("lo", (-2.0, -2.0, -2.0))),
        tuple(spec.get("hi", (2.0, 2.0, 2.0))),
        int(spec.get("n", 32)),
        list(spec.get("transforms", [])),
    )


def _add_mesh_args(p):
    p.add_argument("--config", help="JSON file with 'geometry', 'mesh' and run settings")
    p.add_argument("--mesh-lo", type=parse_vec3)
    p.add_argument("--mesh-hi", type=parse_vec3)
    p.add_argument("--mesh-n", type=int)
    p.add_argument(
        "--transform", action="append", choices=["sinusoidal", "shear_scaling"],
        help="vertex transform, applied in the order given",
    )


def _add_geom_args(p):
    p.add_argument("--geom", choices=["sphere", "capsule", "box", "torus", "halfspace"])
    p.add_argument("--center", type=parse_vec3)
    p.add_argument("--radius", type=float)
    p.add_argument("--a", type=parse_vec3)
    p.add_argument("--b", type=parse_vec3)
    p.add_argument("--lo", type=parse_vec3)
    p.add_argument("--hi", type=parse_vec3)
    p.add_argument("--axis", type=parse_vec3)
    p.add_argument("--major-radius", type=float)
    p.add_argument("--minor-radius", type=float)
    p.add_argument("--point", type=parse_vec3)
    p.add_argument("--normal", type=parse_vec3)
    p.add_argument("--method", choices=["amr", "uniform", "both"], default=None)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--seed", type=int, default=None, help="recorded only; insertion is deterministic")


def build_parser():
    parser = argparse.ArgumentParser(prog="hexvof", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("insert", help="insert one geometry and write a VTK field")
    _add_mesh_args(p)
    _add_geom_args(p)
    p.add_argument("--nsub", type=int, default=None)
    p.add_argument("--out-vtk")
    p.add_argument("--out-csv", help="write the statistics as a one-row CSV")

    p = sub.add_parser("converge", help="relative volume error against n_sub")
    _add_mesh_args(p)
    _add_geom_args(p)
    p.add_argument("--nsub-range", type=parse_range, default=None)
    p.add_argument("--out-csv")

    p = sub.add_parser("quality", help="scaled-Jacobian histogram of a mesh")
    _add_mesh_args(p)
    p.add_argument("--out-csv")
    return parser


def _setting(args, cfg, name, default):
    val = getattr(args, name, None)
    return cfg.get(name, default) if val is None else val


def cmd_insert(args, cfg, out):
    g = geometry_from_args(args, cfg)
    mesh = mesh_from_args(args, cfg).build()
    method = _setting(args, cfg, "method", "amr")
    if method == "both":
        raise SpecError("insert takes a single method")
    run = InsertionConfig(
        n_sub=int(_setting(args, cfg, "nsub", 0)),
        method=method,
        threads=int(_setting(args, cfg, "threads", 1)),
    )
    t0 = time.perf_counter()
    tree = build_kdtree(mesh)
    tree_seconds = time.perf_counter() - t0
    vf, stats = insert_geometry(mesh, tree, g, run)
    stats.tree_build_seconds = tree_seconds

    row = stats.as_dict()
    row["inserted_volume"] = total_volume(vf, mesh)
    try:
        exact = g.volume()
        row["rel_error"] = abs(exact - row["inserted_volume"]) / exact
    except geometry.NoAnalyticVolume:
        row["rel_error"] = None
    for key, val in row.items():
        print(f"{key}={fmt(val) if val is not None else 'n/a'}", file=out)

    out_vtk = _setting(args, cfg, "out_vtk", None)
    if out_vtk:
        write_vtk(out_vtk, mesh, {"volume_fraction": vf.values})
    out_csv = _setting(args, cfg, "out_csv", None)
    if out_csv:
        header = list(row)
        write_csv(out_csv, header, [{k: ("n/a" if v is None else v) for k, v in row.items()}])
    return 0


def cmd_converge(args, cfg, out):
    g = geometry_from_args(args, cfg)
    try:
        g.volume()
    except geometry.NoAnalyticVolume as exc:
        raise SpecError(str(exc)) from exc
    mesh = mesh_from_args(args, cfg).build()
    n_subs = args.nsub_range if args.nsub_range is not None else parse_range(cfg.get("nsub_range", "0..5"))
    if n_subs[0] < 0 or n_subs[-1] > MAX_SUBDIVISIONS:
        raise SpecError(f"n_sub range must lie within [0, {MAX_SUBDIVISIONS}]")
    method = _setting(args, cfg, "method", "amr")
    threads = int(_setting(args, cfg, "threads", 1))
    methods = ["amr", "uniform"] if method == "both" else [method]
    out_csv = _setting(args, cfg, "out_csv", None)
    tree = build_kdtree(mesh)

    for m in methods:
        rows, slope = convergence_study(mesh, g, n_subs, m, threads, tree)
        print(",".join(["method"] + CSV_HEADER), file=out)
        for r in rows:
            print(",".join([m] + [fmt(r[k]) for k in CSV_HEADER]), file=out)
        if slope is not None:
            print(f"{m} slope={slope:.4f}", file=out)
        if out_csv:
            path = Path(out_csv)
            if len(methods) > 1:
                path = path.with_name(f"{path.stem}_{m}{path.suffix}")
            write_csv(path, CSV_HEADER, rows)
    return 0


def cmd_quality(args, cfg, out):
    mesh = mesh_from_args(args, cfg).build(check=False)
    rep = quality_report(mesh)
    print(f"min_quality={fmt(rep['min'])}", file=out)
    print(f"max_quality={fmt(rep['max'])}", file=out)
    print(f"fraction_in_[0.014,0.1]={fmt(rep['band_fraction'])}", file=out)
    print(f"degenerate={rep['degenerate']}", file=out)
    for h in rep["histogram"]:
        print(f"[{h['bin_lo']:g}, {h['bin_hi']:g}): {h['count']}", file=out)
    out_csv = _setting(args, cfg, "out_csv", None)
    if out_csv:
        write_csv(out_csv, ["bin_lo", "bin_hi", "count"], rep["histogram"])
    return 0


COMMANDS = {"insert": cmd_insert, "converge": cmd_converge, "quality": cmd_quality}


_NUMERIC = re.compile(r"^-[\d.]")


def _join_negative_values(argv):
    # "--mesh-lo -10,-10,-10" would otherwise parse "-10,..." as a flag
    out = []
    it = iter(argv)
    for tok in it:
        if tok.startswith("--") and "=" not in tok:
            nxt = next(it, None)
            if nxt is not None and _NUMERIC.match(nxt):
                out.append(f"{tok}={nxt}")
                continue
            out.append(tok)
            if nxt is not None:
                out.append(nxt)
            continue
        out.append(tok)
    return out


def main(argv=None, out=None):
    out = out or sys.stdout
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    args = parser.parse_args(_join_negative_values(argv))
    try:
        cfg = _load_config(args.config)
        return COMMANDS[args.command](args, cfg, out)
    except (SpecError, ValueError) as exc:
        print(f"hexvof: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"hexvof: I/O error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
