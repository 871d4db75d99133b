"""Synthetic curves, oracle perturbations and phantom volumes.

These fixtures stand in for a trained network so the geometric and numerical
behavior of the pipeline can be exercised at desk scale: analytic curves with
known arc length, seeded Gaussian field noise, closeness corruption, a second
"distractor" curve that pulls the field toward itself, and tube-intensity
volumes for training demos.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .core import Grid3, Polyline, ScalarField, VectorField, as_point
from .groundtruth import project_points_to_polyline

CURVE_KINDS = ("line", "arc", "helix", "cane", "sinusoid")

# Maximum arc-length gap (mm) between consecutive generated points.
MAX_SAMPLE_GAP = 0.5


@dataclass(frozen=True)
class CurveSpec:
    """Parameters of one analytic curve.

    Which fields matter depends on ``kind``: line uses start/end; arc uses
    radius and angle_deg; helix uses radius, pitch and turns; cane uses
    radius (arch) and length (descent); sinusoid uses amplitude, wavelength
    and length (span).  ``center`` places the shape's bounding-box center;
    ``seed`` applies a random rigid rotation about it.
    """

    kind: str
    start: tuple = (0.0, 0.0, 0.0)
    end: tuple = (0.0, 0.0, 100.0)
    radius: float = 15.0
    angle_deg: float = 150.0
    pitch: float = 30.0
    turns: float = 2.0
    amplitude: float = 10.0
    wavelength: float = 80.0
    length: float = 120.0
    center: tuple = (0.0, 0.0, 0.0)
    seed: int | None = None

    def __post_init__(self):
        if self.kind not in CURVE_KINDS:
            raise ValueError(f"unknown curve kind {self.kind!r}, expected one of {CURVE_KINDS}")


def _dense_param(n_points: int) -> np.ndarray:
    return np.linspace(0.0, 1.0, max(int(n_points), 2))


def _generate(spec: CurveSpec) -> np.ndarray:
    if spec.kind == "line":
        a, b = as_point(spec.start), as_point(spec.end)
        total = float(np.linalg.norm(b - a))
        if total <= 0:
            raise ValueError("line endpoints must be distinct")
        u = _dense_param(int(np.ceil(total / (MAX_SAMPLE_GAP * 0.9))) + 1)
        return a[None, :] + u[:, None] * (b - a)[None, :]

    if spec.kind == "arc":
        r = float(spec.radius)
        sweep = np.deg2rad(float(spec.angle_deg))
        if r <= 0 or sweep <= 0:
            raise ValueError("arc needs radius > 0 and angle_deg > 0")
        total = r * sweep
        u = _dense_param(int(np.ceil(total / (MAX_SAMPLE_GAP * 0.9))) + 1)
        theta = u * sweep
        return np.stack([r * np.cos(theta), r * np.sin(theta), np.zeros_like(theta)], axis=1)

    if spec.kind == "helix":
        r, pitch, turns = float(spec.radius), float(spec.pitch), float(spec.turns)
        if r <= 0 or pitch <= 0 or turns <= 0:
            raise ValueError("helix needs radius, pitch and turns > 0")
        total = turns * np.sqrt((2 * np.pi * r) ** 2 + pitch**2)
        u = _dense_param(int(np.ceil(total / (MAX_SAMPLE_GAP * 0.9))) + 1)
        theta = u * turns * 2 * np.pi
        return np.stack(
            [r * np.cos(theta), r * np.sin(theta), pitch * theta / (2 * np.pi)], axis=1
        )

    if spec.kind == "cane":
        r, descent = float(spec.radius), float(spec.length)
        if r <= 0 or descent <= 0:
            raise ValueError("cane needs arch radius and descent length > 0")
        # Straight climb at x=+r up to z=0, then a semicircular arch over the
        # top ending at (-r, 0, 0); tangents match at the junction.
        n_line = int(np.ceil(descent / (MAX_SAMPLE_GAP * 0.9))) + 1
        z = np.linspace(-descent, 0.0, n_line)
        straight = np.stack([np.full_like(z, r), np.zeros_like(z), z], axis=1)
        arch_len = np.pi * r
        n_arch = int(np.ceil(arch_len / (MAX_SAMPLE_GAP * 0.9))) + 1
        theta = np.linspace(0.0, np.pi, n_arch)
        arch = np.stack([r * np.cos(theta), np.zeros_like(theta), r * np.sin(theta)], axis=1)
        return np.vstack([straight, arch[1:]])

    # sinusoid
    amp, wav, span = float(spec.amplitude), float(spec.wavelength), float(spec.length)
    if amp <= 0 or wav <= 0 or span <= 0:
        raise ValueError("sinusoid needs amplitude, wavelength and length > 0")
    # Upper bound of arc length for the sampling density.
    slope = 2 * np.pi * amp / wav
    total_ub = span * np.sqrt(1.0 + slope * slope)
    u = _dense_param(int(np.ceil(total_ub / (MAX_SAMPLE_GAP * 0.9))) + 1)
    x = u * span
    return np.stack([x, amp * np.sin(2 * np.pi * x / wav), np.zeros_like(x)], axis=1)


def make_curve(spec: CurveSpec) -> Polyline:
    """Densely sampled analytic curve (consecutive gaps <= 0.5 mm).

    Lines run literally from start to end; the other shapes are generated in
    a canonical pose and placed with their bounding-box midpoint at
    ``center``.  A seed applies a random rigid rotation about that midpoint.
    """
    pts = _generate(spec)
    lo = pts.min(axis=0)
    hi = pts.max(axis=0)
    mid = (lo + hi) / 2.0
    anchor = mid if spec.kind == "line" else as_point(spec.center)
    pts = pts - mid
    if spec.seed is not None:
        rng = np.random.default_rng(spec.seed)
        pts = pts @ _random_rotation(rng).T
    pts = pts + anchor[None, :]
    return Polyline(pts)


def _random_rotation(rng: np.random.Generator) -> np.ndarray:
    """Uniform random rotation matrix (QR of a Gaussian matrix)."""
    m = rng.normal(size=(3, 3))
    q, r = np.linalg.qr(m)
    q *= np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def perturb_field(field: VectorField, sigma: float, seed: int) -> VectorField:
    """Add iid zero-mean Gaussian noise of std ``sigma`` to every component."""
    if sigma < 0:
        raise ValueError(f"sigma must be >= 0, got {sigma!r}")
    if sigma == 0:
        return field
    rng = np.random.default_rng(seed)
    noise = rng.normal(0.0, sigma, size=field.vectors.shape)
    return VectorField(grid=field.grid, vectors=field.vectors + noise)


def corrupt_closeness(closeness: ScalarField, flip_rate: float, seed: int) -> ScalarField:
    """Flip each binary voxel independently with probability ``flip_rate``."""
    if not (0.0 <= flip_rate <= 1.0):
        raise ValueError(f"flip rate must be in [0, 1], got {flip_rate!r}")
    if not closeness.is_binary():
        raise ValueError("closeness must be binary {0, 1} to corrupt")
    if flip_rate == 0:
        return closeness
    rng = np.random.default_rng(seed)
    flips = rng.random(closeness.values.shape) < flip_rate
    values = np.where(flips, 1.0 - closeness.values, closeness.values)
    return ScalarField(grid=closeness.grid, values=values)


def add_distractor(field: VectorField, closeness: ScalarField,
                   distractor: Polyline, radius: float,
                   mode: str = "ours"):
    """Overwrite the field near a second curve so it points at that curve.

    Models a nearby look-alike structure confusing the vector head.  In
    "ours" mode the closeness map is returned untouched (the distractor stays
    outside the region of interest); in "att" mode the returned closeness is
    all-ones, simulating a detector with no closeness head at all.

    Returns ``(field, closeness)``.
    """
    if not radius > 0:
        raise ValueError(f"distractor radius must be > 0, got {radius!r}")
    if mode not in ("ours", "att"):
        raise ValueError(f"mode must be 'ours' or 'att', got {mode!r}")
    centers = field.grid.voxel_centers()
    disp, dist, _, _ = kernels.project_points(centers, distractor.points)
    mask = dist <= float(radius)
    vectors = field.vectors.reshape(-1, 3).copy()
    vectors[mask] = disp[mask]
    out_field = VectorField(grid=field.grid, vectors=vectors.reshape(field.vectors.shape))
    if mode == "att":
        out_closeness = ScalarField(grid=closeness.grid,
                                    values=np.ones_like(closeness.values))
    else:
        out_closeness = closeness
    return out_field, out_closeness


def render_tube_volume(curve: Polyline, tube_radius: float, grid: Grid3,
                       falloff: float) -> ScalarField:
    """Tube-intensity phantom: 1 inside the tube, linear ramp to 0 over
    [tube_radius, tube_radius + falloff], 0 beyond."""
    if not tube_radius > 0:
        raise ValueError(f"tube radius must be > 0, got {tube_radius!r}")
    if falloff < 0:
        raise ValueError(f"falloff must be >= 0, got {falloff!r}")
    centers = grid.voxel_centers()
    _, dist, _ = project_points_to_polyline(centers, curve)
    if falloff == 0:
        values = (dist <= tube_radius).astype(np.float64)
    else:
        values = np.clip((tube_radius + falloff - dist) / falloff, 0.0, 1.0)
        values[dist <= tube_radius] = 1.0
    return ScalarField(grid=grid, values=values.reshape(grid.shape))


def curve_raster_mask(curve: Polyline, grid: Grid3) -> ScalarField:
    """1-voxel-wide binary trace of the curve (nearest-voxel rasterization)."""
    spacing = grid.spacing.as_array()
    step = float(spacing.min()) / 4.0
    n = max(int(np.ceil(curve.total_length / step)) + 1, 2)
    samples = np.stack(
        [curve.point_at_arc_length(s) for s in np.linspace(0, curve.total_length, n)]
    )
    idx = np.rint((samples - np.array(grid.origin)) / spacing).astype(np.int64)
    inside = np.all((idx >= 0) & (idx < np.array(grid.shape)), axis=1)
    idx = idx[inside]
    values = np.zeros(grid.shape)
    values[idx[:, 0], idx[:, 1], idx[:, 2]] = 1.0
    return ScalarField(grid=grid, values=values)


def standard_fixture(kind: str, grid: Grid3, margin: float = 13.0) -> Polyline:
    """A well-conditioned instance of each curve family sized for a grid.

    Shapes are scaled so the whole curve stays ``margin`` mm inside the
    voxel-center bounding box and curvature radii stay large enough for
    chordal interpolation at millimeter scale.
    """
    lo, hi = grid.world_bounds()
    usable = (hi - lo) - 2 * margin
    if np.any(usable <= 0):
        raise ValueError("grid too small for the requested margin")
    center = tuple((lo + hi) / 2.0)
    ext = float(usable.min())
    if kind == "line":
        a = lo + margin
        b = hi - margin
        spec = CurveSpec(kind="line", start=tuple(a), end=tuple(b))
    elif kind == "arc":
        spec = CurveSpec(kind="arc", radius=0.40 * ext, angle_deg=150.0, center=center)
    elif kind == "helix":
        r = 0.22 * ext
        turns = 1.5
        pitch = (usable[2] * 0.9) / turns
        spec = CurveSpec(kind="helix", radius=r, pitch=float(pitch), turns=turns,
                         center=center)
    elif kind == "cane":
        r = 0.24 * ext
        descent = float(usable[2] - r)
        spec = CurveSpec(kind="cane", radius=r, length=descent, center=center)
    elif kind == "sinusoid":
        span = float(usable[0])
        amp = 0.10 * ext
        spec = CurveSpec(kind="sinusoid", amplitude=amp, wavelength=0.9 * span,
                         length=span, center=center)
    else:
        raise ValueError(f"unknown fixture kind {kind!r}")
    return make_curve(spec)
