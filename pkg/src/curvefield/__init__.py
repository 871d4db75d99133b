"""Attraction-field toolkit for detecting non-branching curves in volumes."""

from .bench import run_benchmark
from .core import (
    Grid3,
    PointCloud,
    Polyline,
    ScalarField,
    Spacing,
    VectorField,
    resample_polyline,
    world_coordinates,
)
from .detector import (
    DetectorConfig,
    baseline_heatmap,
    baseline_segmentation,
    detect_curve,
    extract_point_cloud,
    nms,
    order_points_isomap,
)
from .errors import (
    CorruptVolumeError,
    CurveFieldError,
    DisconnectedGraphWarning,
    EmptyMaskError,
    GridMismatchError,
    NoCurveDetectedError,
    PowerIterationError,
    UnsupportedFormatError,
)
from .groundtruth import (
    Projection,
    attraction_field,
    closeness_map,
    distance_map,
    project_to_polyline,
)
from .loss import LossReport, closeness_loss, field_loss, norm_loss, total_loss
from .metrics import MetricReport, curve_metrics
from .synth import (
    CurveSpec,
    add_distractor,
    corrupt_closeness,
    curve_raster_mask,
    make_curve,
    perturb_field,
    render_tube_volume,
    standard_fixture,
)

__version__ = "0.1.0"
