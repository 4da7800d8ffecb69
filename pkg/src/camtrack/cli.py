"""Command-line interface: ``camtrack <command> ...``.

Exit codes: 0 success, 2 input or validation error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import calibration, formats, synth, tracking
from .errors import CamtrackError, InputError, NumericalError


class UsageError(InputError):
    pass


def _floats(text: str, count: int, what: str) -> np.ndarray:
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError:
        raise UsageError(f"{what}: expected {count} comma-separated numbers, got {text!r}") from None
    if len(vals) != count or not all(np.isfinite(vals)):
        raise UsageError(f"{what}: expected {count} comma-separated finite numbers, got {text!r}")
    return np.array(vals)


def _fmt(x) -> str:
    return formats.format_number(x)


def cmd_calibrate(args, out) -> int:
    points = formats.load_correspondences(args.points)
    params, report = calibration.calibrate(points, refine_parameters=not args.no_refine)
    formats.save_camera(args.out, params, report if args.report else None)
    if args.report:
        out.write(f"initial_error {_fmt(report.initial_error)}\n")
        out.write(f"final_error {_fmt(report.final_error)}\n")
        out.write(f"rms_reprojection {_fmt(report.rms_reprojection)}\n")
        out.write(f"max_error {_fmt(max(report.per_point_errors))}\n")
        out.write(f"iterations {report.iterations}\n")
    return 0


def cmd_project(args, out) -> int:
    params = formats.load_camera(args.camera)
    n = params.project(_floats(args.world, 3, "--world"))
    out.write(f"{_fmt(n[0])} {_fmt(n[1])}\n")
    return 0


def cmd_track(args, out) -> int:
    cam = tracking.CalibratedCamera(formats.load_camera(args.camera))
    pixel = _floats(args.pixel, 2, "--pixel")
    residual = None
    if args.mode == "plane-xy":
        r = tracking.track_plane_xy(cam, pixel)
    elif args.mode == "plane":
        if args.plane is None:
            raise UsageError("track plane needs --plane A,B,C,D")
        r = tracking.track_plane(cam, tracking.PlaneConstraint(*_floats(args.plane, 4, "--plane")), pixel)
    elif args.mode == "surface":
        if args.sphere is not None:
            s = _floats(args.sphere, 4, "--sphere")
            surface = tracking.sphere(s[:3], s[3])
        elif args.plane is not None:
            surface = tracking.PlaneConstraint(*_floats(args.plane, 4, "--plane")).as_surface()
        else:
            raise UsageError("track surface needs --sphere cx,cy,cz,R or --plane A,B,C,D")
        if args.guess is None:
            raise UsageError("track surface needs --guess x,y,z")
        r = tracking.track_surface(cam, surface, pixel, _floats(args.guess, 3, "--guess"))
    else:
        if args.camera2 is None or args.pixel2 is None:
            raise UsageError("track stereo needs --camera2 and --pixel2")
        cam2 = tracking.CalibratedCamera(formats.load_camera(args.camera2))
        r, residual = tracking.track_stereo(cam, cam2, pixel, _floats(args.pixel2, 2, "--pixel2"))
    line = " ".join(_fmt(v) for v in r)
    if residual is not None:
        line += f" {_fmt(residual)}"
    out.write(line + "\n")
    return 0


def cmd_synth(args, out) -> int:
    truth = formats.load_camera(args.truth) if args.truth else synth.default_truth()
    scene = synth.make_scene(args.seed, args.sigma, args.spacing, args.per_plane, truth)
    formats.save_correspondences(args.out, scene.points)
    return 0


def cmd_eval(args, out) -> int:
    params = formats.load_camera(args.camera)
    points = formats.load_correspondences(args.points)
    E, eps = calibration.reprojection_error(params, points)
    out.write(f"E {_fmt(E)}\n")
    out.write(f"RMS {_fmt(np.sqrt(E / len(points)))}\n")
    for i, e in enumerate(eps):
        out.write(f"{i} {points[i].plane.value} {_fmt(e)}\n")
    return 0


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="camtrack", description="Pinhole camera calibration and point tracking.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("calibrate", help="calibrate a camera from a correspondence CSV")
    p.add_argument("--points", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--no-refine", action="store_true", help="stop after the closed-form estimate")
    p.add_argument("--report", action="store_true", help="print and store the reprojection report")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("project", help="project a world point to pixels")
    p.add_argument("--camera", required=True)
    p.add_argument("--world", required=True, help="x,y,z in mm")
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("track", help="world position of an observed pixel")
    p.add_argument("mode", choices=["plane-xy", "plane", "surface", "stereo"])
    p.add_argument("--camera", required=True)
    p.add_argument("--pixel", required=True, help="nx,ny")
    p.add_argument("--plane", help="A,B,C,D")
    p.add_argument("--sphere", help="cx,cy,cz,R")
    p.add_argument("--guess", help="x,y,z starting point for surface tracking")
    p.add_argument("--camera2")
    p.add_argument("--pixel2")
    p.set_defaults(func=cmd_track)

    p = sub.add_parser("synth", help="write a synthetic correspondence CSV")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sigma", type=float, default=0.0)
    p.add_argument("--spacing", type=float, default=25.0)
    p.add_argument("--per-plane", type=int, default=10)
    p.add_argument("--out", required=True)
    p.add_argument("--truth", help="camera JSON to render with (default: bundled truth)")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("eval", help="reprojection error of a camera on a correspondence CSV")
    p.add_argument("--camera", required=True)
    p.add_argument("--points", required=True)
    p.set_defaults(func=cmd_eval)
    return parser


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        return args.func(args, out)
    except InputError as exc:
        err.write(f"camtrack: error: {type(exc).__name__}: {exc}\n")
        return 2
    except NumericalError as exc:
        err.write(f"camtrack: error: {type(exc).__name__}: {exc}\n")
        return 3
    except CamtrackError as exc:
        err.write(f"camtrack: error: {type(exc).__name__}: {exc}\n")
        return 3
    except (ValueError, OSError) as exc:
        err.write(f"camtrack: error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
