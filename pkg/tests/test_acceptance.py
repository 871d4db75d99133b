"""Acceptance suite: one test per release criterion, at the stated tolerance.

Run with ``pytest tests/test_acceptance.py -v -s`` to see one PASS line per
criterion.  The oracle bundles (64^3 voxels at 2 mm spacing) are built once
per session in conftest.
"""

import math
import time

import numpy as np

from curvefield.bench import report_json, run_benchmark
from curvefield.core import Grid3, Polyline, ScalarField, Spacing, VectorField
from curvefield.detector import (
    DetectorConfig,
    baseline_heatmap,
    baseline_segmentation,
    detect_curve,
    extract_point_cloud,
)
from curvefield.groundtruth import attraction_field, project_points_to_polyline
from curvefield.loss import BCE_EPS, total_loss
from curvefield.metrics import curve_metrics
from curvefield.synth import (
    CurveSpec,
    add_distractor,
    corrupt_closeness,
    curve_raster_mask,
    make_curve,
    perturb_field,
)


FIXTURE_KINDS = ("line", "arc", "helix", "cane", "sinusoid")


def announce(name):
    print(f"\nACCEPTANCE {name}: PASS")


class TestAcceptance:
    def test_oracle_round_trip(self, oracle_data):
        """Full pipeline on exact oracle inputs: ASSD <= 0.1 mm, SD-1 >= 0.99,
        within 60 s per fixture."""
        for kind in FIXTURE_KINDS:
            start = time.time()
            data = oracle_data(kind)
            pred = detect_curve(data["field"], data["closeness"], DetectorConfig())
            report = curve_metrics(pred, data["curve"])
            elapsed = time.time() - start
            assert report.assd <= 0.1, (kind, report.assd)
            assert report.sd[1.0] >= 0.99, (kind, report.sd[1.0])
            assert elapsed <= 60.0, (kind, elapsed)
        announce("oracle round-trip (5 fixtures, ASSD<=0.1mm, SD-1>=0.99)")

    def test_subpixel_claim_under_noise(self, oracle_data):
        """Gaussian field noise (0.5 mm) + 5% closeness flips: ASSD < 2 mm on
        all fixtures across 10 seeds."""
        for kind in FIXTURE_KINDS:
            data = oracle_data(kind)
            for seed in range(10):
                noisy = perturb_field(data["field"], 0.5, seed=seed)
                corrupted = corrupt_closeness(data["closeness"], 0.05, seed=seed + 10_000)
                pred = detect_curve(noisy, corrupted, DetectorConfig())
                assd = curve_metrics(pred, data["curve"]).assd
                assert assd < 2.0, (kind, seed, assd)
        announce("subpixel accuracy under noise (50 runs, ASSD<2mm)")

    def test_raster_limit_contrast(self, oracle_data):
        """Raster-bound reference detectors trail the field detector by at
        least 3x on the curved fixtures."""
        cfg = DetectorConfig()
        for kind in ("helix", "cane"):
            data = oracle_data(kind)
            ours = curve_metrics(
                detect_curve(data["field"], data["closeness"], cfg), data["curve"]
            ).assd
            mask = curve_raster_mask(data["curve"], data["grid"])
            seg = curve_metrics(
                baseline_segmentation(mask, cfg), data["curve"]
            ).assd
            htmp = curve_metrics(
                baseline_heatmap(data["distance"], data["closeness"], 2.0, cfg),
                data["curve"],
            ).assd
            assert seg >= 3.0 * ours, (kind, seg, ours)
            assert htmp >= 3.0 * ours, (kind, htmp, ours)
        announce("raster-limit contrast (seg and htmp >= 3x ours)")

    def test_closeness_head_ablation(self, oracle_data):
        """With a distractor farther than the closeness radius: the filtered
        pipeline is unaffected while the unfiltered one hits the distractor."""
        data = oracle_data("helix")
        lo, hi = data["grid"].world_bounds()
        distractor = make_curve(CurveSpec(
            kind="line",
            start=(lo[0] + 6.0, lo[1] + 6.0, lo[2] + 15.0),
            end=(lo[0] + 6.0, lo[1] + 6.0, hi[2] - 15.0),
        ))
        _, gap, _ = project_points_to_polyline(distractor.points, data["curve"])
        assert gap.min() > 10.0  # strictly outside the closeness radius

        cfg = DetectorConfig()
        f_ours, c_ours = add_distractor(data["field"], data["closeness"],
                                        distractor, 5.0, "ours")
        ours_assd = curve_metrics(
            detect_curve(f_ours, c_ours, cfg), data["curve"]
        ).assd
        assert ours_assd < 2.0

        f_att, c_att = add_distractor(data["field"], data["closeness"],
                                      distractor, 5.0, "att")
        cloud = extract_point_cloud(f_att, c_att, cfg)
        _, d_distr, _ = project_points_to_polyline(cloud.points, distractor)
        assert int((d_distr <= 1.0).sum()) >= 1
        announce("closeness-head ablation (ours<2mm, att hits distractor)")

    def test_loss_oracle_suite(self):
        """>=20 randomized 4^3 cases against independent per-voxel
        recomputation at 1e-12; exact-zero checks."""
        rng = np.random.default_rng(2024)
        grid = Grid3(shape=(4, 4, 4), spacing=Spacing.isotropic(1.0))
        for case in range(20):
            gt_vec = rng.normal(0, 1.5, (4, 4, 4, 3))
            pred_vec = gt_vec + rng.normal(0, 0.7, (4, 4, 4, 3))
            gt_f = VectorField(grid=grid, vectors=gt_vec)
            pred_f = VectorField(grid=grid, vectors=pred_vec)
            gt_c = ScalarField(grid=grid, values=(rng.random((4, 4, 4)) < 0.5).astype(float))
            pred_c = ScalarField(grid=grid, values=rng.random((4, 4, 4)))
            rc, rf = 3.0, 1.5
            report = total_loss(pred_f, gt_f, pred_c, gt_c, rc, rf)

            field_terms, norm_terms, bce_terms = [], [], []
            for i in range(4):
                for j in range(4):
                    for k in range(4):
                        g = gt_vec[i, j, k]
                        p = pred_vec[i, j, k]
                        gn = math.sqrt(g[0] ** 2 + g[1] ** 2 + g[2] ** 2)
                        pn = math.sqrt(p[0] ** 2 + p[1] ** 2 + p[2] ** 2)
                        if gn <= rf:
                            field_terms.append(
                                math.sqrt(sum((p[a] - g[a]) ** 2 for a in range(3)))
                            )
                        if gn <= rc:
                            norm_terms.append(abs(pn - gn))
                        c = gt_c.values[i, j, k]
                        ph = min(max(pred_c.values[i, j, k], BCE_EPS), 1 - BCE_EPS)
                        bce_terms.append(-(c * math.log(ph) + (1 - c) * math.log(1 - ph)))
            assert abs(report.field_loss - sum(field_terms) / len(field_terms)) <= 1e-12
            assert abs(report.norm_loss - sum(norm_terms) / len(norm_terms)) <= 1e-12
            assert abs(report.closeness_loss - sum(bce_terms) / len(bce_terms)) <= 1e-12

        # perfect prediction: only the BCE clamp floor remains
        vec = rng.normal(0, 1, (4, 4, 4, 3))
        f = VectorField(grid=grid, vectors=vec)
        c = ScalarField(grid=grid, values=np.ones((4, 4, 4)))
        assert total_loss(f, f, c, c, 10.0, 5.0).total <= 1e-6

        # proper axis-flip rotations preserve norms bitwise
        flips = np.array([
            [1.0, 1.0, 1.0], [-1.0, -1.0, 1.0], [-1.0, 1.0, -1.0], [1.0, -1.0, -1.0],
        ])
        rotated = vec * flips[rng.integers(0, 4, (4, 4, 4))]
        report = total_loss(VectorField(grid=grid, vectors=rotated), f, c, c, 10.0, 5.0)
        assert report.norm_loss == 0.0
        announce("loss oracle suite (20 cases at 1e-12, exact zeros)")

    def test_metric_oracle_suite(self, random_polyline):
        """Identity, the 2 mm parallel-offset oracle, and symmetry/ordering
        on 100 random pairs."""
        curve = Polyline([[0, 0, 0], [20, 5, 3], [40, 0, 0]])
        report = curve_metrics(curve, curve)
        assert report.hd <= 1e-9 and report.assd <= 1e-9
        assert report.sd[1.0] == 1.0 and report.sd[3.0] == 1.0

        a = Polyline([[0, 0, 0], [50, 0, 0]])
        b = Polyline([[0, 2, 0], [50, 2, 0]])
        offset = curve_metrics(a, b)
        assert abs(offset.hd - 2.0) <= 1e-6
        assert abs(offset.assd - 2.0) <= 1e-6
        assert offset.sd[1.0] == 0.0 and offset.sd[3.0] == 1.0

        rng = np.random.default_rng(777)
        for _ in range(100):
            x = random_polyline(rng, n_points=int(rng.integers(2, 10)), scale=4.0)
            y = random_polyline(rng, n_points=int(rng.integers(2, 10)), scale=4.0)
            r_xy = curve_metrics(x, y, sample_step=1.0)
            r_yx = curve_metrics(y, x, sample_step=1.0)
            assert r_xy.hd == r_yx.hd
            assert r_xy.assd == r_yx.assd
            assert r_xy.sd == r_yx.sd
            assert r_xy.hd >= r_xy.assd >= 0.0
        announce("metric oracle suite (identity, 2mm offset, symmetry on 100 pairs)")

    def test_hyperparameter_sweep_shape(self):
        """3x3 (rc, rf) sweep at sigma=0.5: byte-identical reports and every
        cell below both raster references."""
        config = {
            "hyper_grid": {"rc": [5.0, 10.0, 20.0], "rf": [5.0, 10.0, 20.0], "t": [0.5]},
            "noise_sigma_mm": [0.5],
            "reps": 3,
            "master_seed": 20240001,
        }
        report = run_benchmark(config)
        again = run_benchmark(config)
        assert report_json(report) == report_json(again)

        baselines = {}
        for cell in report["cells"]:
            if cell["method"] in ("seg", "htmp"):
                assert cell["sigma"] == 0.0
                baselines.setdefault(cell["fixture"], {})[cell["method"]] = (
                    cell["metrics"]["assd"]["mean"]
                )
        ours_cells = [c for c in report["cells"] if c["method"] == "ours"]
        assert len(ours_cells) == 9 * len(report["config"]["fixtures"])
        for cell in ours_cells:
            assert cell["errors"] == []
            assd = cell["metrics"]["assd"]["mean"]
            ref = baselines[cell["fixture"]]
            assert assd < ref["seg"], (cell["fixture"], cell["closeness_radius"],
                                       cell["field_radius"], assd, ref)
            assert assd < ref["htmp"], (cell["fixture"], cell["closeness_radius"],
                                        cell["field_radius"], assd, ref)
        announce("hyperparameter sweep (byte-identical, all 18 cells below references)")

    def test_acceleration_exactness(self, random_polyline):
        """Spatially indexed field construction is bitwise equal to the
        all-segments scan on 20 randomized (grid, curve) pairs."""
        rng = np.random.default_rng(31415)
        for pair in range(20):
            shape = tuple(int(n) for n in rng.integers(4, 20, 3))
            grid = Grid3(
                shape=shape,
                spacing=Spacing(*rng.uniform(0.5, 3.0, 3)),
                origin=tuple(rng.uniform(-30, 30, 3)),
            )
            curve = random_polyline(rng, n_points=int(rng.integers(2, 40)),
                                    scale=rng.uniform(1.0, 12.0))
            fast = attraction_field(grid, curve, method="indexed")
            slow = attraction_field(grid, curve, method="brute")
            assert np.array_equal(fast.vectors, slow.vectors), pair
        announce("acceleration exactness (20 randomized pairs, bitwise)")
