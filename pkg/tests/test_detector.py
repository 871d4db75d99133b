import numpy as np
import pytest

from curvefield.core import Grid3, PointCloud, Polyline, ScalarField, Spacing
from curvefield.detector import (
    DetectorConfig,
    baseline_heatmap,
    baseline_segmentation,
    detect_curve,
    extract_point_cloud,
    nms,
    order_points_isomap,
)
from curvefield.errors import DisconnectedGraphWarning, NoCurveDetectedError
from curvefield.groundtruth import (
    attraction_field,
    closeness_map,
    distance_map,
    project_points_to_polyline,
)
from curvefield.metrics import curve_metrics
from curvefield.synth import curve_raster_mask, perturb_field


class TestConfig:
    def test_defaults(self):
        cfg = DetectorConfig()
        assert cfg.closeness_threshold == 0.5
        assert cfg.field_radius == 5.0

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"closeness_threshold": -0.1},
            {"closeness_threshold": 1.5},
            {"field_radius": 0.0},
            {"nms_radius": -1.0},
            {"isomap_neighbors": 1},
            {"resample_step": 0.0},
        ],
    )
    def test_validation(self, kwargs):
        with pytest.raises(ValueError):
            DetectorConfig(**kwargs)


class TestExtract:
    def test_oracle_points_lie_on_curve(self, oracle_data):
        data = oracle_data("helix")
        cloud = extract_point_cloud(data["field"], data["closeness"], DetectorConfig())
        assert len(cloud) > 100
        _, dist, _ = project_points_to_polyline(cloud.points, data["curve"])
        assert dist.max() <= 1e-6

    def test_all_zero_closeness_empty(self, oracle_data):
        data = oracle_data("helix")
        zeros = ScalarField(grid=data["grid"], values=np.zeros(data["grid"].shape))
        cloud = extract_point_cloud(data["field"], zeros, DetectorConfig())
        assert len(cloud) == 0

    def test_matches_per_voxel_predicate_scan(self):
        grid = Grid3(shape=(16, 16, 16), spacing=Spacing.isotropic(2.0))
        curve = Polyline([[4, 10, 6], [26, 20, 24]])
        field = attraction_field(grid, curve)
        noisy = perturb_field(field, 1.0, seed=4)
        closeness = closeness_map(field, 10.0)
        cfg = DetectorConfig(closeness_threshold=0.5, field_radius=5.0)
        cloud = extract_point_cloud(noisy, closeness, cfg)

        expected_points = []
        expected_conf = []
        for i in range(16):
            for j in range(16):
                for k in range(16):
                    v = noisy.vectors[i, j, k]
                    norm = np.sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2])
                    if closeness.values[i, j, k] >= 0.5 and norm <= 5.0:
                        center = np.array([2.0 * i, 2.0 * j, 2.0 * k])
                        expected_points.append(center + v)
                        expected_conf.append(-norm)
        assert np.array_equal(cloud.points, np.asarray(expected_points))
        assert np.array_equal(cloud.confidence, np.asarray(expected_conf))


class TestNms:
    def test_single_suppression(self):
        cloud = PointCloud(points=[[0, 0, 0], [1, 0, 0]], confidence=[-1.0, -2.0])
        out = nms(cloud, 2.0)
        assert len(out) == 1
        assert np.array_equal(out.points[0], [0, 0, 0])

    def test_no_op_when_far_apart(self):
        pts = np.array([[0, 0, 0], [10, 0, 0], [0, 10, 0]], dtype=float)
        cloud = PointCloud(points=pts, confidence=[-1.0, -2.0, -3.0])
        out = nms(cloud, 2.0)
        assert len(out) == 3
        assert {tuple(p) for p in out.points} == {tuple(p) for p in pts}

    def test_against_quadratic_reference(self):
        def reference(points, conf, radius):
            order = sorted(range(len(points)), key=lambda i: (-conf[i], tuple(points[i])))
            kept, dead = [], set()
            for i in order:
                if i in dead:
                    continue
                kept.append(i)
                for j in order:
                    if j not in dead and np.linalg.norm(points[j] - points[i]) <= radius:
                        dead.add(j)
            return kept

        rng = np.random.default_rng(31)
        for trial in range(10):
            n = 200
            pts = rng.uniform(0, 30, (n, 3))
            conf = rng.normal(0, 1, n)
            cloud = PointCloud(points=pts, confidence=conf)
            out = nms(cloud, 3.0)
            ref = reference(pts, conf, 3.0)
            assert np.array_equal(out.points, pts[ref]), trial

    def test_pairwise_separation_and_top_point(self, oracle_data):
        data = oracle_data("cane")
        cloud = extract_point_cloud(data["field"], data["closeness"], DetectorConfig())
        out = nms(cloud, 2.0)
        d = np.linalg.norm(out.points[:, None] - out.points[None, :], axis=2)
        np.fill_diagonal(d, np.inf)
        assert d.min() > 2.0
        best = np.lexsort(
            (cloud.points[:, 2], cloud.points[:, 1], cloud.points[:, 0], -cloud.confidence)
        )[0]
        assert any(np.array_equal(p, cloud.points[best]) for p in out.points)


class TestOrdering:
    def test_shuffled_line_recovers_order(self):
        xs = np.linspace(0, 40, 21)
        pts = np.stack([xs, np.zeros_like(xs), np.zeros_like(xs)], axis=1)
        rng = np.random.default_rng(2)
        perm = rng.permutation(len(pts))
        cloud = PointCloud(points=pts[perm], confidence=np.zeros(len(pts)))
        ordered = order_points_isomap(cloud, 6)
        assert np.array_equal(ordered.points[:, 0], xs)

    def test_quarter_circle_recovers_generation_order(self):
        theta = np.linspace(0, np.pi / 2, 100)
        pts = np.stack([50 * np.cos(theta), 50 * np.sin(theta), np.zeros_like(theta)], axis=1)
        rng = np.random.default_rng(8)
        perm = rng.permutation(100)
        cloud = PointCloud(points=pts[perm], confidence=np.zeros(100))
        ordered = order_points_isomap(cloud, 6)
        if not np.array_equal(ordered.points[0], pts[0]):
            ordered = Polyline(ordered.points[::-1])
        assert np.array_equal(ordered.points, pts)

    def test_permutation_invariance(self):
        rng = np.random.default_rng(14)
        theta = np.linspace(0, np.pi, 60)
        pts = np.stack([30 * np.cos(theta), 30 * np.sin(theta), theta * 3], axis=1)
        ref = None
        for _ in range(4):
            perm = rng.permutation(len(pts))
            cloud = PointCloud(points=pts[perm], confidence=np.zeros(len(pts)))
            ordered = order_points_isomap(cloud, 6)
            if ref is None:
                ref = ordered.points
            else:
                assert np.array_equal(ordered.points, ref)

    def test_disconnected_graph_bridged_with_warning(self):
        a = np.stack([np.linspace(0, 10, 8), np.zeros(8), np.zeros(8)], axis=1)
        b = a + np.array([100.0, 0.0, 0.0])
        cloud = PointCloud(points=np.vstack([a, b]), confidence=np.zeros(16))
        with pytest.warns(DisconnectedGraphWarning):
            ordered = order_points_isomap(cloud, 3)
        assert ordered.points.shape[0] == 16

    def test_fewer_than_two_points_rejected(self):
        cloud = PointCloud(points=np.zeros((1, 3)), confidence=np.zeros(1))
        with pytest.raises(NoCurveDetectedError):
            order_points_isomap(cloud, 6)


class TestDetect:
    def test_oracle_roundtrip_helix(self, oracle_data):
        data = oracle_data("helix")
        pred = detect_curve(data["field"], data["closeness"], DetectorConfig())
        report = curve_metrics(pred, data["curve"])
        assert report.assd <= 0.1
        assert report.sd[1.0] >= 0.99

    def test_noisy_subpixel(self, oracle_data):
        data = oracle_data("cane")
        noisy = perturb_field(data["field"], 0.5, seed=3)
        pred = detect_curve(noisy, data["closeness"], DetectorConfig())
        assert curve_metrics(pred, data["curve"]).assd < 2.0

    def test_all_zero_closeness_no_curve(self, oracle_data):
        data = oracle_data("line")
        zeros = ScalarField(grid=data["grid"], values=np.zeros(data["grid"].shape))
        with pytest.raises(NoCurveDetectedError):
            detect_curve(data["field"], zeros, DetectorConfig())

    def test_deterministic(self, oracle_data):
        data = oracle_data("arc")
        noisy = perturb_field(data["field"], 0.5, seed=9)
        a = detect_curve(noisy, data["closeness"], DetectorConfig())
        b = detect_curve(noisy, data["closeness"], DetectorConfig())
        assert np.array_equal(a.points, b.points)


class TestBaselines:
    def test_segmentation_recovers_axis_aligned_line(self):
        # Line through voxel centers, with a length commensurate with the
        # suppression lattice so both endpoints survive NMS.
        grid = Grid3(shape=(23, 8, 8), spacing=Spacing.isotropic(2.0))
        curve = Polyline([[0, 8, 8], [44, 8, 8]])
        mask = curve_raster_mask(curve, grid)
        pred = baseline_segmentation(mask, DetectorConfig())
        report = curve_metrics(pred, curve)
        assert report.assd <= 1e-9

    def test_segmentation_rougher_than_ours_on_helix(self, oracle_data):
        data = oracle_data("helix")
        ours = curve_metrics(
            detect_curve(data["field"], data["closeness"], DetectorConfig()),
            data["curve"],
        ).assd
        mask = curve_raster_mask(data["curve"], data["grid"])
        seg = curve_metrics(baseline_segmentation(mask, DetectorConfig()), data["curve"]).assd
        assert seg > ours

    def test_segmentation_single_voxel_no_curve(self):
        grid = Grid3(shape=(8, 8, 8), spacing=Spacing.isotropic(2.0))
        values = np.zeros(grid.shape)
        values[4, 4, 4] = 1.0
        with pytest.raises(NoCurveDetectedError):
            baseline_segmentation(ScalarField(grid=grid, values=values), DetectorConfig())

    def test_segmentation_rejects_nonbinary(self):
        grid = Grid3(shape=(2, 2, 2), spacing=Spacing.isotropic(1.0))
        with pytest.raises(ValueError):
            baseline_segmentation(
                ScalarField(grid=grid, values=np.full(grid.shape, 0.5)), DetectorConfig()
            )

    def test_heatmap_tau_below_min_distance_no_curve(self):
        grid = Grid3(shape=(8, 8, 8), spacing=Spacing.isotropic(2.0))
        curve = Polyline([[1.0, 1.0, 0.0], [1.0, 1.0, 14.0]])  # 1mm off centers in x,y
        field = attraction_field(grid, curve)
        dist = distance_map(field)
        closeness = closeness_map(field, 10.0)
        with pytest.raises(NoCurveDetectedError):
            baseline_heatmap(dist, closeness, 0.5, DetectorConfig())

    def test_heatmap_tau_equal_rf_selects_same_voxels(self, oracle_data):
        data = oracle_data("sinusoid")
        cfg = DetectorConfig()
        norms = data["field"].norms().reshape(-1)
        close = data["closeness"].values.reshape(-1)
        extract_mask = (close >= cfg.closeness_threshold) & (norms <= cfg.field_radius)
        d = data["distance"].values.reshape(-1)
        heatmap_mask = (close >= cfg.closeness_threshold) & (d <= cfg.field_radius)
        assert np.array_equal(extract_mask, heatmap_mask)

    def test_heatmap_rougher_than_ours_on_cane(self, oracle_data):
        data = oracle_data("cane")
        cfg = DetectorConfig()
        ours = curve_metrics(
            detect_curve(data["field"], data["closeness"], cfg), data["curve"]
        ).assd
        htmp = curve_metrics(
            baseline_heatmap(data["distance"], data["closeness"], 2.0, cfg), data["curve"]
        ).assd
        assert htmp > ours
