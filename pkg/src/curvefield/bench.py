"""Benchmark harness: fixtures x methods x hyperparameter sweep.

For every detector cell the suite builds the exact oracle data for a fixture,
perturbs it with seeded noise, runs the detector, and evaluates the curve
metrics against the analytic fixture.  The raster-limited reference methods
(seg, htmp) run once per fixture on noiseless oracle inputs; they provide the
comparison rows the sweep is judged against.  One master seed makes the
entire report byte-identical across runs.
"""

from __future__ import annotations

import csv
import io as _stdio
from pathlib import Path

import numpy as np

from .core import Grid3, ScalarField, Spacing
from .detector import (
    DetectorConfig,
    baseline_heatmap,
    baseline_segmentation,
    detect_curve,
)
from .errors import CurveFieldError
from .groundtruth import attraction_field, distance_map
from .io import dumps_json
from .metrics import curve_metrics
from .synth import corrupt_closeness, curve_raster_mask, perturb_field, standard_fixture

DEFAULT_SUITE = {
    "master_seed": 20240001,
    "grid": {"shape": [64, 64, 64], "spacing": [2.0, 2.0, 2.0], "origin": [0.0, 0.0, 0.0]},
    "fixtures": ["cane", "sinusoid"],
    "methods": ["ours", "seg", "htmp"],
    "noise_sigma_mm": [0.5],
    "closeness_flip_rate": 0.0,
    "hyper_grid": {"rc": [5.0, 10.0, 20.0], "rf": [5.0, 10.0, 20.0], "t": [0.5]},
    "reps": 3,
    "htmp_tau_mm": 2.0,
    "detector": {"nms_radius": 2.0, "isomap_neighbors": 6, "resample_step": 1.0},
    "metrics": {"thresholds": [1.0, 3.0], "sample_step": 0.5},
}

METRIC_KEYS = ("sd@1", "sd@3", "hd", "assd")


def _suite_with_defaults(config: dict) -> dict:
    suite = {**DEFAULT_SUITE, **(config or {})}
    for key in ("grid", "hyper_grid", "detector", "metrics"):
        suite[key] = {**DEFAULT_SUITE[key], **(config.get(key, {}) if config else {})}
    return suite


def _grid_from(suite: dict) -> Grid3:
    g = suite["grid"]
    return Grid3(shape=tuple(g["shape"]), spacing=Spacing(*g["spacing"]),
                 origin=tuple(g["origin"]))


def _report_metrics(report) -> dict:
    taus = sorted(report.sd)
    return {
        "sd@1": report.sd[taus[0]],
        "sd@3": report.sd[taus[-1]],
        "hd": report.hd,
        "assd": report.assd,
    }


def _summarize(samples: list) -> dict:
    out = {}
    for key in METRIC_KEYS:
        vals = np.array([s[key] for s in samples], dtype=np.float64)
        out[key] = {"mean": float(vals.mean()), "std": float(vals.std())}
    return out


def run_benchmark(config: dict = None) -> dict:
    """Execute the suite and return the full report as a plain dict."""
    suite = _suite_with_defaults(config)
    grid = _grid_from(suite)
    det = suite["detector"]
    thresholds = [float(t) for t in suite["metrics"]["thresholds"]]
    sample_step = float(suite["metrics"]["sample_step"])
    master_seed = int(suite["master_seed"])
    flip_rate = float(suite["closeness_flip_rate"])

    cells = []
    series = []
    cell_index = 0
    for fixture_name in suite["fixtures"]:
        curve = standard_fixture(fixture_name, grid)
        field = attraction_field(grid, curve)
        dist = distance_map(field)

        def eval_curve(pred):
            report = curve_metrics(pred, curve, thresholds=thresholds,
                                   sample_step=sample_step)
            return _report_metrics(report)

        if "ours" in suite["methods"]:
            for rc in suite["hyper_grid"]["rc"]:
                closeness = ScalarField(
                    grid=grid, values=(dist.values <= float(rc)).astype(np.float64)
                )
                for rf in suite["hyper_grid"]["rf"]:
                    for t in suite["hyper_grid"]["t"]:
                        config_ = DetectorConfig(
                            closeness_threshold=float(t),
                            field_radius=float(rf),
                            nms_radius=float(det["nms_radius"]),
                            isomap_neighbors=int(det["isomap_neighbors"]),
                            resample_step=float(det["resample_step"]),
                        )
                        for sigma in suite["noise_sigma_mm"]:
                            samples, errors = [], []
                            for rep in range(int(suite["reps"])):
                                seed_seq = np.random.SeedSequence(
                                    entropy=master_seed,
                                    spawn_key=(cell_index, rep),
                                )
                                seeds = seed_seq.generate_state(2)
                                try:
                                    noisy = perturb_field(field, float(sigma), int(seeds[0]))
                                    cls = closeness
                                    if flip_rate > 0:
                                        cls = corrupt_closeness(cls, flip_rate, int(seeds[1]))
                                    pred = detect_curve(noisy, cls, config_)
                                    samples.append(eval_curve(pred))
                                except CurveFieldError as exc:
                                    errors.append(f"rep {rep}: {exc}")
                            cell = {
                                "fixture": fixture_name,
                                "method": "ours",
                                "closeness_radius": float(rc),
                                "field_radius": float(rf),
                                "closeness_threshold": float(t),
                                "sigma": float(sigma),
                                "reps": int(suite["reps"]),
                                "errors": errors,
                                "metrics": _summarize(samples) if samples else None,
                            }
                            cells.append(cell)
                            cell_index += 1

        base_config = DetectorConfig(
            nms_radius=float(det["nms_radius"]),
            isomap_neighbors=int(det["isomap_neighbors"]),
            resample_step=float(det["resample_step"]),
        )
        if "seg" in suite["methods"]:
            errors, samples = [], []
            try:
                mask = curve_raster_mask(curve, grid)
                pred = baseline_segmentation(mask, base_config)
                samples.append(eval_curve(pred))
            except CurveFieldError as exc:
                errors.append(str(exc))
            cells.append({
                "fixture": fixture_name,
                "method": "seg",
                "sigma": 0.0,
                "reps": 1,
                "errors": errors,
                "metrics": _summarize(samples) if samples else None,
            })
            cell_index += 1
        if "htmp" in suite["methods"]:
            errors, samples = [], []
            try:
                closeness10 = ScalarField(
                    grid=grid, values=(dist.values <= 10.0).astype(np.float64)
                )
                pred = baseline_heatmap(dist, closeness10, float(suite["htmp_tau_mm"]),
                                        base_config)
                samples.append(eval_curve(pred))
            except CurveFieldError as exc:
                errors.append(str(exc))
            cells.append({
                "fixture": fixture_name,
                "method": "htmp",
                "tau": float(suite["htmp_tau_mm"]),
                "sigma": 0.0,
                "reps": 1,
                "errors": errors,
                "metrics": _summarize(samples) if samples else None,
            })
            cell_index += 1

    for cell in cells:
        if cell["metrics"] is not None:
            series.append({
                "fixture": cell["fixture"],
                "method": cell["method"],
                "closeness_radius": cell.get("closeness_radius"),
                "field_radius": cell.get("field_radius"),
                "sigma": cell["sigma"],
                "assd_mean": cell["metrics"]["assd"]["mean"],
                "hd_mean": cell["metrics"]["hd"]["mean"],
                "sd1_mean": cell["metrics"]["sd@1"]["mean"],
                "sd3_mean": cell["metrics"]["sd@3"]["mean"],
            })

    return {"master_seed": master_seed, "config": suite, "cells": cells, "series": series}


def report_json(report: dict) -> str:
    return dumps_json(report)


def series_csv(report: dict) -> str:
    buf = _stdio.StringIO()
    fields = ["fixture", "method", "closeness_radius", "field_radius", "sigma",
              "assd_mean", "hd_mean", "sd1_mean", "sd3_mean"]
    writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    writer.writeheader()
    for row in report["series"]:
        writer.writerow({k: ("" if row.get(k) is None else repr(row[k])
                             if isinstance(row.get(k), float) else row.get(k))
                         for k in fields})
    return buf.getvalue()


def report_table(report: dict) -> str:
    lines = [
        f"{'fixture':<10} {'method':<6} {'rc':>5} {'rf':>5} {'sigma':>6} "
        f"{'SD-1':>7} {'SD-3':>7} {'HD':>8} {'ASSD':>8}"
    ]
    for cell in report["cells"]:
        m = cell["metrics"]
        rc = cell.get("closeness_radius")
        rf = cell.get("field_radius")
        rc_s = f"{rc:g}" if rc is not None else "-"
        rf_s = f"{rf:g}" if rf is not None else "-"
        if m is None:
            lines.append(
                f"{cell['fixture']:<10} {cell['method']:<6} {rc_s:>5} {rf_s:>5} "
                f"{cell['sigma']:>6g} {'FAILED':>7}"
            )
        else:
            lines.append(
                f"{cell['fixture']:<10} {cell['method']:<6} {rc_s:>5} {rf_s:>5} "
                f"{cell['sigma']:>6g} {m['sd@1']['mean']:>7.4f} {m['sd@3']['mean']:>7.4f} "
                f"{m['hd']['mean']:>8.3f} {m['assd']['mean']:>8.4f}"
            )
    return "\n".join(lines) + "\n"


def write_report(out_dir, report: dict, plots: bool = False) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(report_json(report))
    (out / "series.csv").write_text(series_csv(report))
    (out / "table.txt").write_text(report_table(report))
    if plots:
        _write_plots(out, report)


def _write_plots(out: Path, report: dict) -> None:
    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        (out / "plots-skipped.txt").write_text("matplotlib not installed\n")
        return
    fixtures = sorted({row["fixture"] for row in report["series"]})
    fig, axes = plt.subplots(1, max(len(fixtures), 1), figsize=(5 * len(fixtures), 4),
                             squeeze=False)
    for ax, fixture in zip(axes[0], fixtures):
        rows = [r for r in report["series"]
                if r["fixture"] == fixture and r["method"] == "ours"]
        rcs = sorted({r["closeness_radius"] for r in rows})
        for rc in rcs:
            pts = sorted(
                [(r["field_radius"], r["assd_mean"]) for r in rows
                 if r["closeness_radius"] == rc]
            )
            ax.plot([p[0] for p in pts], [p[1] for p in pts], marker="o",
                    label=f"rc={rc:g}")
        for method, style in (("seg", "--"), ("htmp", ":")):
            vals = [r["assd_mean"] for r in report["series"]
                    if r["fixture"] == fixture and r["method"] == method]
            if vals:
                ax.axhline(vals[0], linestyle=style, color="gray", label=method)
        ax.set_title(fixture)
        ax.set_xlabel("field radius (mm)")
        ax.set_ylabel("ASSD (mm)")
        ax.legend()
    fig.tight_layout()
    fig.savefig(out / "assd_sweep.png", dpi=120)
    plt.close(fig)
