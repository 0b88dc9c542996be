"""Command-line entry point: analyze / bench / validate.

All lengths on the command line are centimeters. TOPOPRINT_LOG sets the log
level (DEBUG, INFO, ...).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import statistics
import sys
import time
from dataclasses import dataclass
from pathlib import Path

from . import __version__
from .analysis import (AnalysisConfig, analyze, export_bundle, import_bundle,
                       validate_bundle)
from .errors import PipelineError, TopoprintError
from .mapper_graph import global_components
from .model_ingest import parse_ply, parse_stl
from .persistence import DEFAULT_SIMPLEX_BUDGET

logger = logging.getLogger("topoprint.cli")

SWEEP_DEFAULTS = {
    # one varied parameter per sweep, the other two fixed
    "slices": {"values": [8, 16, 32, 64, 128], "overlap": 0.05, "grid": 0.15},
    "overlap": {"values": [0.025, 0.05, 0.1, 0.15, 0.2], "slices": 32,
                "grid": 0.15},
    "grid": {"values": [0.15, 0.2, 0.25, 0.3, 0.35], "slices": 32,
             "overlap": 0.1},
}

CSV_COLUMNS = ["param", "value", "slicing_ms", "mapper_s", "persistence_s",
               "total_s"]


@dataclass
class StageTimings:
    """Per-stage wall times from monotonic clocks; slicing is reported in
    milliseconds, the heavier stages in seconds."""

    slicing_ms: float
    mapper_s: float
    persistence_s: float
    total_s: float

    @classmethod
    def from_dict(cls, d: dict) -> "StageTimings":
        return cls(slicing_ms=d["slicing_ms"], mapper_s=d["mapper_s"],
                   persistence_s=d["persistence_s"], total_s=d["total_s"])

    def as_row(self) -> dict:
        return {"slicing_ms": self.slicing_ms, "mapper_s": self.mapper_s,
                "persistence_s": self.persistence_s, "total_s": self.total_s}


def load_model(path: str):
    data = Path(path).read_bytes()
    suffix = Path(path).suffix.lower()
    if suffix == ".ply":
        return parse_ply(data)
    if suffix == ".stl":
        return parse_stl(data)
    # sniff: PLY magic, else STL
    if data[:3] == b"ply":
        return parse_ply(data)
    return parse_stl(data)


def config_from_args(args) -> AnalysisConfig:
    return AnalysisConfig(
        xy_res=args.xy_res if args.xy_res is not None else 0.1,
        z_res=args.z_res,
        slice_count=args.slices,
        overlap=args.overlap if args.overlap is not None else 0.05,
        target_height=args.height,
        densify_max_edge=args.densify,
        margin_cells=args.margin_cells,
        simplex_budget=args.simplex_budget,
        threads=args.threads,
    )


def print_report(bundle, out=None):
    fg, eg = bundle.filled_graph, bundle.empty_graph
    empty_components, _ = global_components(eg)
    w = (out if out is not None else sys.stdout).write
    w(f"points:           {len(bundle.points)}\n")
    w(f"filled graph:     {fg.node_count()} nodes, {fg.edge_count()} edges\n")
    w(f"empty graph:      {eg.node_count()} nodes, {eg.edge_count()} edges, "
      f"{empty_components} components\n")
    holes = [(n.slice_index, n.component_id, n.hole_count)
             for n in fg.nodes if n.hole_count > 0]
    w(f"holes:            {sum(h for _, _, h in holes)} across "
      f"{len(holes)} components\n")
    for s, c, h in holes:
        w(f"  slice {s:>3} component {c:>3}: {h} hole{'s' if h != 1 else ''}\n")
    w(f"watertight:       {'yes' if bundle.watertight else 'no'}\n")
    if bundle.timings:
        t = StageTimings.from_dict(bundle.timings)
        w(f"timings:          slicing {t.slicing_ms:.1f} ms, "
          f"mapper {t.mapper_s:.2f} s, persistence {t.persistence_s:.2f} s, "
          f"total {t.total_s:.2f} s\n")


def cmd_analyze(args) -> int:
    try:
        config = config_from_args(args)
    except TopoprintError as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        print("run 'topoprint analyze --help' for usage", file=sys.stderr)
        return 2
    source = load_model(args.input)
    bundle = analyze(source, config)
    if args.out:
        Path(args.out).write_bytes(export_bundle(bundle))
        logger.info("bundle written to %s", args.out)
    if args.dump_diagrams:
        _dump_diagrams(source, config, args.dump_diagrams)
    print_report(bundle)
    return 0


def _dump_diagrams(source, config, directory):
    """Debug export of per-component H1 diagrams as JSON files."""
    from .components import connected_components
    from .model_ingest import IndexedMesh
    from .persistence import diagram_to_json, h1_intervals
    from .slicing import assign_points, build_cover
    from .model_ingest import densify_mesh, scale_to_height

    cloud = source.vertices if isinstance(source, IndexedMesh) else source
    if isinstance(source, IndexedMesh) and config.densify_max_edge:
        cloud = densify_mesh(source, config.densify_max_edge)
    if config.target_height:
        cloud = scale_to_height(cloud, config.target_height)
    cover = build_cover(cloud.z_extent(), z_res=config.z_res,
                        slice_count=config.slice_count, overlap=config.overlap)
    assignment = assign_points(cloud, cover)
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for s, members in enumerate(assignment.members):
        for comp in connected_components(cloud.coords[members][:, :2],
                                         config.xy_res, ids=members,
                                         slice_index=s):
            if comp.member_ids.size < 3:
                continue
            pts = cloud.coords[comp.member_ids][:, :2]
            ivs = h1_intervals(pts, config.hole_scale(),
                               simplex_budget=config.simplex_budget)
            path = directory / f"slice{s:03d}_component{comp.component_id:03d}.json"
            path.write_text(diagram_to_json(ivs))


def cmd_validate(args) -> int:
    bundle = import_bundle(Path(args.bundle).read_bytes())
    problems = validate_bundle(bundle)
    if problems:
        for p in problems:
            print(f"INVALID: {p}")
        return 1
    print(f"bundle OK: {len(bundle.points)} points, "
          f"{bundle.filled_graph.node_count()} filled nodes, "
          f"{bundle.empty_graph.node_count()} empty nodes, "
          f"watertight={'yes' if bundle.watertight else 'no'}")
    return 0


def bench_sweep(source, param: str, values, *, base_overlap=None,
                base_slices=None, base_grid=None, height=None,
                repetitions: int = 3, warmup: bool = True,
                threads: int | None = None,
                simplex_budget: int = DEFAULT_SIMPLEX_BUDGET):
    """Run one parameter sweep; returns a list of per-value records.

    Protocol: one discarded warm-up run, then ``repetitions`` timed runs,
    median per stage reported. A value that violates a precondition yields a
    failed record and the sweep continues.
    """
    defaults = SWEEP_DEFAULTS[param]
    overlap = defaults.get("overlap", base_overlap) if base_overlap is None \
        else base_overlap
    slices = defaults.get("slices", base_slices) if base_slices is None \
        else base_slices
    grid = defaults.get("grid", base_grid) if base_grid is None else base_grid
    threads = threads or (os.cpu_count() or 1)
    records = []
    for value in values:
        kw = {"overlap": overlap, "slice_count": slices, "xy_res": grid}
        if param == "slices":
            kw["slice_count"] = int(value)
        elif param == "overlap":
            kw["overlap"] = float(value)
        elif param == "grid":
            kw["xy_res"] = float(value)
        else:
            raise ValueError(f"unknown sweep parameter {param!r}")
        record = {"param": param, "value": value, "status": "ok",
                  "threads": threads, "config": dict(kw)}
        try:
            config = AnalysisConfig(
                xy_res=kw["xy_res"], slice_count=kw["slice_count"],
                overlap=kw["overlap"], target_height=height,
                simplex_budget=simplex_budget, threads=threads)
            runs = []
            total_runs = repetitions + (1 if warmup else 0)
            for rep in range(total_runs):
                t0 = time.perf_counter()
                bundle = analyze(source, config)
                elapsed = time.perf_counter() - t0
                if warmup and rep == 0:
                    continue
                timings = dict(bundle.timings)
                timings["total_s"] = elapsed
                runs.append(timings)
            record["timings"] = {
                key: statistics.median(r[key] for r in runs)
                for key in ("slicing_ms", "mapper_s", "persistence_s", "total_s")
            }
        except TopoprintError as exc:
            record["status"] = "failed"
            record["error"] = str(exc)
            logger.warning("sweep value %s failed: %s", value, exc)
        records.append(record)
    return records


def sweep_records_to_csv(records) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS)
    writer.writeheader()
    for rec in records:
        row = {"param": rec["param"], "value": rec["value"]}
        if rec["status"] == "ok":
            row.update({k: f"{rec['timings'][k]:.6f}" for k in
                        ("slicing_ms", "mapper_s", "persistence_s", "total_s")})
        else:
            row.update({k: "" for k in
                        ("slicing_ms", "mapper_s", "persistence_s", "total_s")})
        writer.writerow(row)
    return buf.getvalue()


def cmd_bench(args) -> int:
    source = load_model(args.input)
    spec = args.bench or args.param
    if spec not in SWEEP_DEFAULTS:
        print(f"unknown sweep '{spec}'; choose from {sorted(SWEEP_DEFAULTS)}",
              file=sys.stderr)
        return 2
    values = [float(v) for v in args.values.split(",")] if args.values \
        else SWEEP_DEFAULTS[spec]["values"]
    records = bench_sweep(
        source, spec, values,
        base_overlap=args.overlap, base_slices=args.slices,
        base_grid=args.xy_res, height=args.height,
        repetitions=args.repetitions, warmup=not args.no_warmup,
        threads=args.threads, simplex_budget=args.simplex_budget)
    csv_text = sweep_records_to_csv(records)
    out_base = Path(args.out) if args.out else Path(f"bench_{spec}")
    csv_path = out_base.with_suffix(".csv")
    json_path = out_base.with_suffix(".json")
    csv_path.write_text(csv_text)
    json_path.write_text(json.dumps(records, indent=2))
    print(csv_text, end="")
    logger.info("sweep written to %s and %s", csv_path, json_path)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="topoprint",
        description="Topological printability analysis for point-cloud models")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--input", required=True, help="PLY or STL file")
        p.add_argument("--height", type=float, default=None,
                       help="scale model to this z height (cm)")
        group = p.add_mutually_exclusive_group(required=False)
        group.add_argument("--z-res", dest="z_res", type=float, default=None,
                           help="layer thickness (cm)")
        group.add_argument("--slices", type=int, default=None,
                           help="number of slices (alternative to --z-res)")
        p.add_argument("--overlap", type=float, default=None,
                       help="slice overlap (cm), default 0.05")
        p.add_argument("--xy-res", dest="xy_res", type=float, default=None,
                       help="printer xy resolution / grid resolution (cm), "
                            "default 0.1")
        p.add_argument("--margin-cells", dest="margin_cells", type=int,
                       default=2, help="empty-space margin cells per side")
        p.add_argument("--densify", type=float, default=None,
                       help="subdivide mesh until edges <= this length (cm)")
        p.add_argument("--simplex-budget", dest="simplex_budget", type=int,
                       default=DEFAULT_SIMPLEX_BUDGET)
        p.add_argument("--threads", type=int, default=1,
                       help="parallel workers for per-component persistence")

    p_analyze = sub.add_parser("analyze", help="run the pipeline, write the "
                               "bundle, print a report")
    common(p_analyze)
    p_analyze.add_argument("--out", default=None, help="bundle JSON path")
    p_analyze.add_argument("--dump-diagrams", dest="dump_diagrams",
                           default=None,
                           help="directory for per-component diagram JSON")
    p_analyze.set_defaults(func=cmd_analyze)

    p_bench = sub.add_parser("bench", help="single-parameter timing sweeps")
    common(p_bench)
    p_bench.add_argument("--bench", default=None,
                         help="sweep spec: slices | overlap | grid")
    p_bench.add_argument("--param", default="slices",
                         choices=sorted(SWEEP_DEFAULTS),
                         help="parameter to vary (alias of --bench)")
    p_bench.add_argument("--values", default=None,
                         help="comma-separated sweep values")
    p_bench.add_argument("--repetitions", type=int, default=3)
    p_bench.add_argument("--no-warmup", action="store_true")
    p_bench.add_argument("--out", default=None,
                         help="output base path (.csv/.json appended)")
    p_bench.set_defaults(func=cmd_bench, threads=None)

    p_validate = sub.add_parser("validate",
                                help="re-check a bundle's invariants")
    p_validate.add_argument("bundle", help="bundle JSON path")
    p_validate.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(
        level=os.environ.get("TOPOPRINT_LOG", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except PipelineError as exc:
        print(f"error in stage '{exc.stage}': {exc}", file=sys.stderr)
        return 1
    except TopoprintError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
