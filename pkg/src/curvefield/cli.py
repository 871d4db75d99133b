"""Command-line surface.

Subcommands: synth, gt, loss, infer, eval, bench.  Every command is a thin
composition of module operations; no numeric logic lives here.  Exit codes:
0 success, 1 usage error, 2 data error, 3 no curve detected.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from pathlib import Path

from . import bench as bench_mod
from . import io as cfio
from .core import Grid3, Spacing
from .detector import DetectorConfig, detect_curve, extract_point_cloud, nms
from .errors import CurveFieldError, NoCurveDetectedError
from .groundtruth import attraction_field, closeness_map, distance_map
from .loss import total_loss
from .metrics import curve_metrics
from .synth import CURVE_KINDS, CurveSpec, make_curve, render_tube_volume

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NO_CURVE = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _triple(text: str, cast=float):
    parts = [p for p in text.replace(",", " ").split() if p]
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected three comma-separated values, got {text!r}")
    return tuple(cast(p) for p in parts)


def _int_triple(text: str):
    return _triple(text, cast=int)


def _float_list(text: str):
    return [float(p) for p in text.replace(",", " ").split() if p]


def _add_grid_flags(parser):
    parser.add_argument("--grid", type=_int_triple, help="voxel counts nx,ny,nz")
    parser.add_argument("--spacing", type=_triple, default=(2.0, 2.0, 2.0),
                        help="voxel size mm (default 2,2,2)")
    parser.add_argument("--origin", type=_triple, default=(0.0, 0.0, 0.0),
                        help="world position of voxel (0,0,0) center, mm")


def _grid_from_args(args) -> Grid3:
    if args.grid is None:
        raise ValueError("--grid is required for gridded outputs")
    return Grid3(shape=args.grid, spacing=Spacing(*args.spacing), origin=args.origin)


def _add_detector_flags(parser):
    parser.add_argument("--t", type=float, default=0.5, help="closeness threshold")
    parser.add_argument("--rf", type=float, default=5.0, help="max vector norm, mm")
    parser.add_argument("--nms-radius", type=float, default=2.0, help="suppression radius, mm")
    parser.add_argument("--isomap-k", type=int, default=6, help="kNN neighbor count")
    parser.add_argument("--resample-step", type=float, default=1.0, help="output step, mm")


def _detector_config(args) -> DetectorConfig:
    return DetectorConfig(
        closeness_threshold=args.t,
        field_radius=args.rf,
        nms_radius=args.nms_radius,
        isomap_neighbors=args.isomap_k,
        resample_step=args.resample_step,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="curvefield",
                     description="Attraction-field curve detection toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic curve and its oracle data")
    p.add_argument("--kind", choices=CURVE_KINDS, required=True)
    p.add_argument("--start", type=_triple, default=(0.0, 0.0, 0.0))
    p.add_argument("--end", type=_triple, default=(0.0, 0.0, 100.0))
    p.add_argument("--radius", type=float, default=15.0)
    p.add_argument("--angle", type=float, default=150.0, help="arc sweep, degrees")
    p.add_argument("--pitch", type=float, default=30.0)
    p.add_argument("--turns", type=float, default=2.0)
    p.add_argument("--amplitude", type=float, default=10.0)
    p.add_argument("--wavelength", type=float, default=80.0)
    p.add_argument("--length", type=float, default=120.0)
    p.add_argument("--center", type=_triple, default=None,
                   help="shape center, mm (default: grid center)")
    p.add_argument("--seed", type=int, default=None, help="random rigid rotation seed")
    _add_grid_flags(p)
    p.add_argument("--rc", type=float, default=10.0, help="closeness radius, mm")
    p.add_argument("--tube-radius", type=float, default=6.0)
    p.add_argument("--falloff", type=float, default=4.0)
    p.add_argument("--emit", default="curve,field,closeness",
                   help="comma list from curve,field,closeness,distance,volume")
    p.add_argument("--out-prefix", required=True)

    p = sub.add_parser("gt", help="ground-truth field/closeness from a curve document")
    p.add_argument("--curve", required=True)
    _add_grid_flags(p)
    p.add_argument("--rc", type=float, default=10.0)
    p.add_argument("--method", choices=("indexed", "brute"), default="indexed")
    p.add_argument("--emit", default="field,closeness",
                   help="comma list from field,closeness,distance")
    p.add_argument("--out-prefix", required=True)

    p = sub.add_parser("loss", help="evaluate the loss terms of a prediction")
    p.add_argument("--pred-field", required=True)
    p.add_argument("--pred-closeness", required=True)
    p.add_argument("--gt-field", required=True)
    p.add_argument("--gt-closeness", required=True)
    p.add_argument("--rc", type=float, default=10.0)
    p.add_argument("--rf", type=float, default=5.0)
    p.add_argument("--squared-field-loss", action="store_true")
    p.add_argument("--out", default=None, help="write the report here as well")

    p = sub.add_parser("infer", help="detect a curve from field + closeness volumes")
    p.add_argument("--field", required=True)
    p.add_argument("--closeness", required=True)
    _add_detector_flags(p)
    p.add_argument("--out", required=True, help="output curve document")
    p.add_argument("--cloud-out", default=None,
                   help="also dump the thinned point cloud here")

    p = sub.add_parser("eval", help="curve metrics between two curve documents")
    p.add_argument("--pred", required=True)
    p.add_argument("--ref", required=True)
    p.add_argument("--thresholds", type=_float_list, default=[1.0, 3.0])
    p.add_argument("--sample-step", type=float, default=0.5)
    p.add_argument("--out", default=None)

    p = sub.add_parser("bench", help="run the benchmark suite")
    p.add_argument("--config", default=None, help="suite config JSON (default: built-in)")
    p.add_argument("--seed", type=int, default=None, help="override the master seed")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--plots", action="store_true")

    return parser


def _cmd_synth(args) -> int:
    emit = {e.strip() for e in args.emit.split(",") if e.strip()}
    unknown = emit - {"curve", "field", "closeness", "distance", "volume"}
    if unknown:
        raise ValueError(f"unknown emit targets: {sorted(unknown)}")
    needs_grid = emit - {"curve"}
    grid = _grid_from_args(args) if needs_grid else None
    if args.center is not None:
        center = args.center
    elif grid is not None:
        lo, hi = grid.world_bounds()
        center = tuple((lo + hi) / 2.0)
    else:
        center = (0.0, 0.0, 0.0)
    spec = CurveSpec(
        kind=args.kind, start=args.start, end=args.end, radius=args.radius,
        angle_deg=args.angle, pitch=args.pitch, turns=args.turns,
        amplitude=args.amplitude, wavelength=args.wavelength, length=args.length,
        center=center, seed=args.seed,
    )
    curve = make_curve(spec)
    prefix = Path(args.out_prefix)
    provenance = f"synth kind={args.kind} seed={args.seed}"
    if "curve" in emit:
        cfio.write_curve(prefix.parent / f"{prefix.name}.curve.json",
                         cfio.CurveDocument.from_polyline(curve, provenance=provenance))
    if needs_grid:
        field = attraction_field(grid, curve)
        if "field" in emit:
            cfio.write_vector_field(prefix.parent / f"{prefix.name}.field", field)
        if "closeness" in emit:
            cfio.write_scalar_field(prefix.parent / f"{prefix.name}.closeness",
                                    closeness_map(field, args.rc))
        if "distance" in emit:
            cfio.write_scalar_field(prefix.parent / f"{prefix.name}.distance",
                                    distance_map(field))
        if "volume" in emit:
            cfio.write_scalar_field(
                prefix.parent / f"{prefix.name}.volume",
                render_tube_volume(curve, args.tube_radius, grid, args.falloff),
            )
    print(f"synth: wrote {', '.join(sorted(emit))} for {args.kind} to {prefix}.*")
    return EXIT_OK


def _cmd_gt(args) -> int:
    emit = {e.strip() for e in args.emit.split(",") if e.strip()}
    unknown = emit - {"field", "closeness", "distance"}
    if unknown:
        raise ValueError(f"unknown emit targets: {sorted(unknown)}")
    curve = cfio.read_curve(args.curve).to_polyline()
    grid = _grid_from_args(args)
    field = attraction_field(grid, curve, method=args.method)
    prefix = Path(args.out_prefix)
    if "field" in emit:
        cfio.write_vector_field(prefix.parent / f"{prefix.name}.field", field)
    if "closeness" in emit:
        cfio.write_scalar_field(prefix.parent / f"{prefix.name}.closeness",
                                closeness_map(field, args.rc))
    if "distance" in emit:
        cfio.write_scalar_field(prefix.parent / f"{prefix.name}.distance",
                                distance_map(field))
    print(f"gt: wrote {', '.join(sorted(emit))} to {prefix}.*")
    return EXIT_OK


def _cmd_loss(args) -> int:
    report = total_loss(
        cfio.read_vector_field(args.pred_field),
        cfio.read_vector_field(args.gt_field),
        cfio.read_scalar_field(args.pred_closeness),
        cfio.read_scalar_field(args.gt_closeness),
        closeness_radius=args.rc,
        field_radius=args.rf,
        squared=args.squared_field_loss,
    )
    text = report.as_text()
    sys.stdout.write(text)
    if args.out:
        Path(args.out).write_text(text)
    return EXIT_OK


def _cmd_infer(args) -> int:
    field = cfio.read_vector_field(args.field)
    closeness = cfio.read_scalar_field(args.closeness)
    config = _detector_config(args)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        curve = detect_curve(field, closeness, config)
        if args.cloud_out:
            cloud = nms(extract_point_cloud(field, closeness, config), config.nms_radius)
            cfio.write_curve(
                args.cloud_out,
                cfio.CurveDocument(points_mm=cloud.points, ordered=False,
                                   provenance="infer point cloud",
                                   confidence=cloud.confidence),
            )
    warn_tags = tuple(
        "disconnected-graph-bridged" if "disconnected" in str(w.message) else str(w.message)
        for w in caught
    )
    provenance = (
        f"infer t={config.closeness_threshold} rf={config.field_radius} "
        f"nms={config.nms_radius} k={config.isomap_neighbors} "
        f"step={config.resample_step}"
    )
    cfio.write_curve(args.out,
                     cfio.CurveDocument.from_polyline(curve, provenance=provenance,
                                                      warnings_=warn_tags))
    print(f"infer: wrote {args.out} ({curve.points.shape[0]} points)")
    return EXIT_OK


def _cmd_eval(args) -> int:
    pred = cfio.read_curve(args.pred).to_polyline()
    ref = cfio.read_curve(args.ref).to_polyline()
    report = curve_metrics(pred, ref, thresholds=args.thresholds,
                           sample_step=args.sample_step)
    text = report.as_text()
    sys.stdout.write(text)
    if args.out:
        Path(args.out).write_text(text)
    return EXIT_OK


def _cmd_bench(args) -> int:
    config = {}
    if args.config:
        config = json.loads(Path(args.config).read_text())
    if args.seed is not None:
        config["master_seed"] = args.seed
    report = bench_mod.run_benchmark(config)
    bench_mod.write_report(args.out_dir, report, plots=args.plots)
    sys.stdout.write(bench_mod.report_table(report))
    print(f"bench: report written to {args.out_dir}")
    return EXIT_OK


_COMMANDS = {
    "synth": _cmd_synth,
    "gt": _cmd_gt,
    "loss": _cmd_loss,
    "infer": _cmd_infer,
    "eval": _cmd_eval,
    "bench": _cmd_bench,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except NoCurveDetectedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_CURVE
    except (CurveFieldError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
