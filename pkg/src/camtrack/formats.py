"""Correspondence CSV and camera JSON files.

Correspondence CSV (UTF-8, LF line endings)::

    # camtrack-csv-v1
    plane,nx,ny,rx,ry,rz
    XY,674,254,25,25,0

Camera JSON::

    {"format_version": 1, "alpha": ..., "beta": ..., "gamma": ...,
     "n0x": ..., "n0y": ..., "g": [g1, g2, g3], "r_cam_bar": [x, y, z],
     "report": {...}}

Pixels for image coordinates and intrinsics, millimetres for world
coordinates and ``r_cam_bar``. Floats are written in their shortest
round-trip form, and integral values without a trailing ``.0``.
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

from .calibration import CalibrationPoint, PlaneLabel
from .errors import CamtrackError, ParseError, SchemaError, ValidationError
from .geometry import CameraParameters, Intrinsics

CSV_MAGIC = "# camtrack-csv-v1"
CSV_HEADER = ["plane", "nx", "ny", "rx", "ry", "rz"]
FORMAT_VERSION = 1
CAMERA_KEYS = ("alpha", "beta", "gamma", "n0x", "n0y", "g", "r_cam_bar")
REPORT_KEYS = ("initial_error", "final_error", "rms_reprojection", "per_point_errors", "iterations")


def format_number(x: float) -> str:
    """Shortest decimal that round-trips; integral values lose the ``.0``."""
    x = float(x)
    if x == 0.0:
        return "0"
    if x.is_integer() and abs(x) < 1e16:
        return str(int(x))
    return repr(x)


# ---------------------------------------------------------------------------
# correspondences
# ---------------------------------------------------------------------------


def parse_correspondences(text: str, source: str = "<string>") -> list[CalibrationPoint]:
    points = []
    header_seen = False
    for lineno, raw in enumerate(text.split("\n"), start=1):
        line = raw.rstrip("\r")
        if not line.strip():
            continue
        if line.startswith("#"):
            continue
        try:
            fields = next(csv.reader([line]))
        except csv.Error as exc:
            raise ParseError(f"{source}: {exc}", lineno) from exc
        fields = [f.strip() for f in fields]
        if not header_seen:
            if fields != CSV_HEADER:
                raise ParseError(f"{source}: expected header {','.join(CSV_HEADER)}, got {line!r}", lineno)
            header_seen = True
            continue
        if len(fields) != 6:
            raise ParseError(f"{source}: expected 6 fields, got {len(fields)}", lineno)
        try:
            plane = PlaneLabel(fields[0])
        except ValueError:
            raise ValidationError(f"{source}: unknown plane {fields[0]!r} (expected XY, XZ or YZ)", lineno) from None
        try:
            nums = [float(f) for f in fields[1:]]
        except ValueError as exc:
            raise ParseError(f"{source}: {exc}", lineno) from exc
        if not all(math.isfinite(v) for v in nums):
            raise ValidationError(f"{source}: non-finite value", lineno)
        try:
            points.append(CalibrationPoint(nums[:2], nums[2:], plane))
        except ValidationError as exc:
            raise ValidationError(f"{source}: {exc}", lineno) from exc
    if not header_seen:
        raise ParseError(f"{source}: missing header line")
    return points


def load_correspondences(path) -> list[CalibrationPoint]:
    """Read a correspondence CSV, preserving row order.

    Raises:
        ParseError: malformed file; the message carries the line number.
        ValidationError: a row that is well-formed but not a valid
            calibration point (unknown plane, non-zero out-of-plane coordinate).
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    return parse_correspondences(text, str(path))


def dump_correspondences(points) -> str:
    buf = io.StringIO()
    buf.write(CSV_MAGIC + "\n")
    buf.write(",".join(CSV_HEADER) + "\n")
    for p in points:
        vals = [*p.image, *p.world]
        buf.write(",".join([p.plane.value] + [format_number(v) for v in vals]) + "\n")
    return buf.getvalue()


def save_correspondences(path, points):
    Path(path).write_text(dump_correspondences(points), encoding="utf-8", newline="\n")


# ---------------------------------------------------------------------------
# camera files
# ---------------------------------------------------------------------------


def camera_to_dict(params: CameraParameters, report=None) -> dict:
    i = params.intrinsics
    data = {
        "format_version": FORMAT_VERSION,
        "alpha": float(i.alpha),
        "beta": float(i.beta),
        "gamma": float(i.gamma),
        "n0x": float(i.n0x),
        "n0y": float(i.n0y),
        "g": [float(v) for v in params.g],
        "r_cam_bar": [float(v) for v in params.r_cam_bar],
    }
    if report is not None:
        data["report"] = report.to_dict() if hasattr(report, "to_dict") else dict(report)
    return data


def _number(data, key) -> float:
    v = data[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise SchemaError(f"{key!r} must be a number")
    if not math.isfinite(v):
        raise SchemaError(f"{key!r} must be finite")
    return float(v)


def _triple(data, key) -> np.ndarray:
    v = data[key]
    if not isinstance(v, list) or len(v) != 3:
        raise SchemaError(f"{key!r} must be an array of 3 numbers")
    return np.array([_number({key: x}, key) for x in v])


def camera_from_dict(data) -> tuple[CameraParameters, dict | None]:
    if not isinstance(data, dict):
        raise SchemaError("camera file must hold a JSON object")
    allowed = set(CAMERA_KEYS) | {"format_version", "report"}
    unknown = sorted(set(data) - allowed)
    if unknown:
        raise SchemaError(f"unknown keys: {', '.join(unknown)}")
    missing = [k for k in CAMERA_KEYS if k not in data]
    if missing:
        raise SchemaError(f"missing keys: {', '.join(missing)}")
    version = data.get("format_version", FORMAT_VERSION)
    if version != FORMAT_VERSION:
        raise SchemaError(f"unsupported format_version {version!r}")
    report = data.get("report")
    if report is not None:
        if not isinstance(report, dict):
            raise SchemaError("'report' must be an object")
        extra = sorted(set(report) - set(REPORT_KEYS))
        if extra:
            raise SchemaError(f"unknown report keys: {', '.join(extra)}")
    try:
        intr = Intrinsics(*(_number(data, k) for k in ("alpha", "beta", "gamma", "n0x", "n0y")))
    except CamtrackError as exc:
        if isinstance(exc, SchemaError):
            raise
        raise SchemaError(str(exc)) from exc
    return CameraParameters(intr, _triple(data, "g"), _triple(data, "r_cam_bar")), report


def dump_camera(params: CameraParameters, report=None) -> str:
    # json writes floats with repr(), which round-trips all 17 significant digits
    return json.dumps(camera_to_dict(params, report), indent=2) + "\n"


def save_camera(path, params: CameraParameters, report=None):
    Path(path).write_text(dump_camera(params, report), encoding="utf-8", newline="\n")


def load_camera_file(path) -> tuple[CameraParameters, dict | None]:
    """Camera parameters and the optional ``report`` block, verbatim."""
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, UnicodeDecodeError) as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc.msg}", exc.lineno) from exc
    return camera_from_dict(data)


def load_camera(path) -> CameraParameters:
    return load_camera_file(path)[0]
