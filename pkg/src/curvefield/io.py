"""File formats: raw raster volumes with JSON sidecar headers, curve
documents, and canonical JSON serialization helpers.

A volume is stored as ``<stem>.raw`` (payload) plus ``<stem>.json`` (header).
The payload is little-endian IEEE float32, C-order, with axes x, y, z and the
channel index varying fastest.  Curve documents are standalone JSON files.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import Grid3, Polyline, ScalarField, Spacing, VectorField
from .errors import CorruptVolumeError, UnsupportedFormatError

VOLUME_DTYPE = "float32-le"
VOLUME_LAYOUT = "xyzc"
CURVE_FORMAT = "curve-document"


def volume_paths(path) -> tuple:
    """(header_path, payload_path) for any of <stem>, <stem>.raw, <stem>.json.

    Only .raw/.json suffixes are stripped; dots inside the stem (e.g.
    ``case.field``) are preserved.
    """
    p = Path(path)
    stem = p.with_suffix("") if p.suffix in (".raw", ".json") else p
    return stem.parent / (stem.name + ".json"), stem.parent / (stem.name + ".raw")


def write_volume(path, grid: Grid3, values: np.ndarray) -> None:
    """Write a scalar (nx,ny,nz) or vector (nx,ny,nz,3) array with its header.

    Values are stored as float32; pass float32-representable data for a
    bitwise round-trip.
    """
    values = np.asarray(values)
    if values.shape == grid.shape:
        channels = 1
    elif values.shape == (*grid.shape, 3):
        channels = 3
    else:
        raise ValueError(
            f"array shape {values.shape!r} does not match grid shape {grid.shape!r}"
        )
    header_path, payload_path = volume_paths(path)
    payload = np.ascontiguousarray(values, dtype="<f4").tobytes()
    header = {
        "shape": list(grid.shape),
        "spacing": [grid.spacing.sx, grid.spacing.sy, grid.spacing.sz],
        "origin": list(grid.origin),
        "channels": channels,
        "dtype": VOLUME_DTYPE,
        "layout": VOLUME_LAYOUT,
    }
    header_path.parent.mkdir(parents=True, exist_ok=True)
    header_path.write_text(dumps_json(header))
    payload_path.write_bytes(payload)


def read_volume(path) -> tuple:
    """Read a volume; returns ``(grid, values)`` with float64 values.

    Raises UnsupportedFormatError for unknown dtype/layout and
    CorruptVolumeError when the payload length disagrees with the header.
    """
    header_path, payload_path = volume_paths(path)
    try:
        header = json.loads(header_path.read_text())
    except json.JSONDecodeError as exc:
        raise CorruptVolumeError(f"unreadable header {header_path}: {exc}") from exc
    for key in ("shape", "spacing", "origin", "channels", "dtype", "layout"):
        if key not in header:
            raise CorruptVolumeError(f"header {header_path} missing field {key!r}")
    if header["dtype"] != VOLUME_DTYPE:
        raise UnsupportedFormatError(f"unsupported dtype {header['dtype']!r}")
    if header["layout"] != VOLUME_LAYOUT:
        raise UnsupportedFormatError(f"unsupported layout {header['layout']!r}")
    shape = tuple(int(n) for n in header["shape"])
    channels = int(header["channels"])
    if channels not in (1, 3):
        raise UnsupportedFormatError(f"unsupported channel count {channels}")
    expected = shape[0] * shape[1] * shape[2] * channels * 4
    payload = payload_path.read_bytes()
    if len(payload) != expected:
        raise CorruptVolumeError(
            f"payload {payload_path} is {len(payload)} bytes, header implies {expected}"
        )
    grid = Grid3(
        shape=shape,
        spacing=Spacing(*(float(s) for s in header["spacing"])),
        origin=tuple(float(v) for v in header["origin"]),
    )
    values = np.frombuffer(payload, dtype="<f4").astype(np.float64)
    if channels == 1:
        values = values.reshape(shape)
    else:
        values = values.reshape(*shape, 3)
    return grid, values


def write_vector_field(path, field_: VectorField) -> None:
    write_volume(path, field_.grid, field_.vectors)


def read_vector_field(path) -> VectorField:
    grid, values = read_volume(path)
    if values.ndim != 4:
        raise CorruptVolumeError(f"{path} holds a scalar volume, expected 3 channels")
    return VectorField(grid=grid, vectors=values)


def write_scalar_field(path, field_: ScalarField) -> None:
    write_volume(path, field_.grid, field_.values)


def read_scalar_field(path) -> ScalarField:
    grid, values = read_volume(path)
    if values.ndim != 3:
        raise CorruptVolumeError(f"{path} holds a vector volume, expected 1 channel")
    return ScalarField(grid=grid, values=values)


@dataclass(frozen=True)
class CurveDocument:
    """Interchange record for an ordered curve or an unordered point set."""

    points_mm: np.ndarray
    ordered: bool = True
    provenance: str = ""
    warnings: tuple = ()
    confidence: np.ndarray | None = None

    def to_polyline(self) -> Polyline:
        if not self.ordered:
            raise ValueError("document is an unordered point set, not a curve")
        return Polyline(self.points_mm)

    @classmethod
    def from_polyline(cls, curve: Polyline, provenance: str = "",
                      warnings_: tuple = ()) -> "CurveDocument":
        return cls(points_mm=np.asarray(curve.points), ordered=True,
                   provenance=provenance, warnings=tuple(warnings_))


def write_curve(path, doc: CurveDocument) -> None:
    payload = {
        "format": CURVE_FORMAT,
        "version": 1,
        "points_mm": [list(map(float, p)) for p in np.asarray(doc.points_mm)],
        "ordered": bool(doc.ordered),
        "provenance": doc.provenance,
        "warnings": list(doc.warnings),
    }
    if doc.confidence is not None:
        payload["confidence"] = [float(c) for c in np.asarray(doc.confidence)]
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(dumps_json(payload))


def read_curve(path) -> CurveDocument:
    try:
        payload = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise CorruptVolumeError(f"unreadable curve document {path}: {exc}") from exc
    if payload.get("format") != CURVE_FORMAT:
        raise UnsupportedFormatError(f"{path} is not a {CURVE_FORMAT} file")
    points = np.asarray(payload["points_mm"], dtype=np.float64)
    confidence = payload.get("confidence")
    return CurveDocument(
        points_mm=points,
        ordered=bool(payload.get("ordered", True)),
        provenance=str(payload.get("provenance", "")),
        warnings=tuple(payload.get("warnings", ())),
        confidence=None if confidence is None else np.asarray(confidence, dtype=np.float64),
    )


def dumps_json(obj) -> str:
    """Canonical JSON text: sorted keys, fixed separators, trailing newline.

    Byte-identical output for equal inputs, which the benchmark relies on.
    """
    return json.dumps(obj, sort_keys=True, indent=2, separators=(",", ": ")) + "\n"
