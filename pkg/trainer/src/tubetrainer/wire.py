"""Reader/writer for the curvefield interchange formats.

Implemented against the documented format only (raw little-endian float32
payload in C order with axes x, y, z and channels fastest, plus a JSON
sidecar header; JSON curve documents).  This package never imports the
curvefield library; files are the contract.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

DTYPE_TAG = "float32-le"
LAYOUT_TAG = "xyzc"


def _paths(path):
    p = Path(path)
    stem = p.with_suffix("") if p.suffix in (".raw", ".json") else p
    return stem.parent / (stem.name + ".json"), stem.parent / (stem.name + ".raw")


def read_volume(path):
    """Returns (header dict, float32 array of shape (nx,ny,nz[,3]))."""
    header_path, payload_path = _paths(path)
    header = json.loads(header_path.read_text())
    if header["dtype"] != DTYPE_TAG or header["layout"] != LAYOUT_TAG:
        raise ValueError(f"unsupported volume encoding in {header_path}")
    shape = tuple(int(n) for n in header["shape"])
    channels = int(header["channels"])
    payload = payload_path.read_bytes()
    expected = shape[0] * shape[1] * shape[2] * channels * 4
    if len(payload) != expected:
        raise ValueError(f"payload length {len(payload)} != header implied {expected}")
    values = np.frombuffer(payload, dtype="<f4")
    if channels == 1:
        return header, values.reshape(shape).copy()
    return header, values.reshape(*shape, channels).copy()


def write_volume(path, header_like: dict, values: np.ndarray) -> None:
    """Write an array using the grid geometry of an existing header."""
    values = np.asarray(values)
    shape = tuple(int(n) for n in header_like["shape"])
    if values.shape == shape:
        channels = 1
    elif values.shape == (*shape, 3):
        channels = 3
    else:
        raise ValueError(f"array shape {values.shape} does not match header shape {shape}")
    header = {
        "shape": list(shape),
        "spacing": [float(s) for s in header_like["spacing"]],
        "origin": [float(v) for v in header_like["origin"]],
        "channels": channels,
        "dtype": DTYPE_TAG,
        "layout": LAYOUT_TAG,
    }
    header_path, payload_path = _paths(path)
    header_path.parent.mkdir(parents=True, exist_ok=True)
    header_path.write_text(json.dumps(header, sort_keys=True, indent=2) + "\n")
    payload_path.write_bytes(np.ascontiguousarray(values, dtype="<f4").tobytes())


def read_curve_points(path) -> np.ndarray:
    doc = json.loads(Path(path).read_text())
    if doc.get("format") != "curve-document":
        raise ValueError(f"{path} is not a curve document")
    return np.asarray(doc["points_mm"], dtype=np.float64)
