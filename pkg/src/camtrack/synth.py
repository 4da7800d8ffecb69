"""Synthetic trihedral scenes with known ground truth.

Random numbers come from :func:`numpy.random.default_rng` (PCG64), which
produces the same stream on every platform for a given seed, so generated
fixtures are bit-stable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .calibration import CalibrationPoint, PlaneLabel
from .errors import DegenerateProjection, PointBehindCamera
from .geometry import CameraParameters, Extrinsics, Intrinsics, project_with


@dataclass(frozen=True, eq=False)
class SyntheticScene:
    truth: CameraParameters
    points: list
    noise_sigma: float
    seed: int


def _l_pattern(m: int) -> list[tuple[int, int]]:
    # odd-multiple indices: diagonal, then along the second axis, then along the first
    diag = [(k, k) for k in range(m)]
    row = [(0, k) for k in range(1, m)]
    col = [(k, 0) for k in range(1, m)]
    return diag + row + col


def trihedral_grid(spacing: float = 25.0, per_plane: int = 10) -> list[tuple[np.ndarray, PlaneLabel]]:
    """World points on the three pattern planes, in XY, XZ, YZ order.

    Coordinates are odd multiples of ``spacing``; with the defaults this is
    exactly the layout of the bundled Table 1 data (25, 75, 125, 175 mm).
    """
    if not spacing > 0:
        raise ValueError("spacing must be positive")
    if per_plane < 5:
        raise ValueError("per_plane must be at least 5")
    m = math.ceil((per_plane + 2) / 3)
    pattern = _l_pattern(m)[:per_plane]
    out = []
    for plane in PlaneLabel:
        a, b = plane.axes
        for i, j in pattern:
            w = np.zeros(3)
            w[a] = (2 * i + 1) * spacing
            w[b] = (2 * j + 1) * spacing
            out.append((w, plane))
    return out


def look_at(position, target=(0.0, 0.0, 0.0), up=(0.0, 0.0, 1.0)) -> np.ndarray:
    """Camera rotation ``A_cam`` for a camera at ``position`` aimed at ``target``.

    The optical axis (camera z) points at the target and the world ``up``
    direction appears upwards in the image (camera y, given negative ``beta``).
    """
    position = np.asarray(position, dtype=float)
    z = np.asarray(target, dtype=float) - position
    z /= np.linalg.norm(z)
    up = np.asarray(up, dtype=float)
    y = up - (up @ z) * z
    y /= np.linalg.norm(y)
    x = np.cross(y, z)
    return np.column_stack([x, y, z])


def default_truth() -> CameraParameters:
    """The reference synthetic camera, read from the bundled fixture file."""
    from .datasets import default_truth_path
    from .formats import load_camera

    with default_truth_path() as path:
        return load_camera(path)


def random_truth(seed: int) -> CameraParameters:
    """A camera drawn around the default geometry: positive-octant position
    looking at the pattern vertex, zero skew."""
    rng = np.random.default_rng(seed)
    direction = rng.uniform(0.7, 1.3, size=3)
    position = rng.uniform(550.0, 800.0) * direction / np.linalg.norm(direction)
    A = look_at(position)
    roll = np.deg2rad(rng.uniform(-10.0, 10.0))
    c, s = np.cos(roll), np.sin(roll)
    A = A @ np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    alpha = -rng.uniform(800.0, 1100.0)
    beta = alpha * rng.uniform(0.98, 1.02)
    intr = Intrinsics(alpha, beta, 0.0, 640.0 + rng.uniform(-30, 30), 360.0 + rng.uniform(-30, 30))
    return CameraParameters.from_pose(intr, Extrinsics.from_world_position(A, position))


def render(truth: CameraParameters, world, noise_sigma: float = 0.0, seed: int = 0) -> list[CalibrationPoint]:
    """Project ``(world point, plane)`` pairs and add isotropic Gaussian pixel noise.

    Raises:
        PointBehindCamera: listing the indices of points with non-positive
            projective scale.
    """
    world = list(world)
    W = np.array([w for w, _ in world], dtype=float).reshape(-1, 3)
    try:
        n, c = project_with(truth.projection, W, return_scale=True)
    except DegenerateProjection as exc:
        raise PointBehindCamera(str(exc), [exc.index]) from exc
    behind = np.flatnonzero(c <= 0)
    if behind.size:
        raise PointBehindCamera(f"points behind the camera: {behind.tolist()}", behind.tolist())
    if noise_sigma > 0:
        rng = np.random.default_rng(seed)
        n = n + rng.normal(0.0, noise_sigma, size=n.shape)
    return [CalibrationPoint(px, w, plane) for px, (w, plane) in zip(n, world)]


def make_scene(
    seed: int = 0,
    noise_sigma: float = 0.0,
    spacing: float = 25.0,
    per_plane: int = 10,
    truth: CameraParameters | None = None,
) -> SyntheticScene:
    if truth is None:
        truth = default_truth()
    pts = render(truth, trihedral_grid(spacing, per_plane), noise_sigma, seed)
    return SyntheticScene(truth, pts, noise_sigma, seed)


def independent_project(truth: CameraParameters, p) -> np.ndarray:
    """Pixel position of world point ``p`` computed term by term.

    Kept separate from :func:`camtrack.geometry.project` on purpose (rotation
    from the axis-angle form, scalar pinhole equations, explicit division) so
    the two can check each other.
    """
    g = np.asarray(truth.g, dtype=float)
    tan_half = math.sqrt(g[0] ** 2 + g[1] ** 2 + g[2] ** 2)
    if tan_half == 0.0:
        R = np.eye(3)
    else:
        k = g / tan_half
        theta = 2.0 * math.atan(tan_half)
        ct, st = math.cos(theta), math.sin(theta)
        R = np.empty((3, 3))
        for a in range(3):
            for b in range(3):
                R[a, b] = (1.0 - ct) * k[a] * k[b] + (ct if a == b else 0.0)
        R[0, 1] -= st * k[2]
        R[1, 0] += st * k[2]
        R[0, 2] += st * k[1]
        R[2, 0] -= st * k[1]
        R[1, 2] -= st * k[0]
        R[2, 1] += st * k[0]
    rbar = truth.r_cam_bar
    # camera position in the world frame, then the point relative to it
    r_cam = [sum(R[a, b] * rbar[b] for b in range(3)) for a in range(3)]
    d = [float(p[a]) - r_cam[a] for a in range(3)]
    ux, uy, uz = (sum(R[b, a] * d[b] for b in range(3)) for a in range(3))
    if abs(uz) <= 1e-12:
        raise DegenerateProjection("point lies in the camera plane")
    i = truth.intrinsics
    nx = i.n0x + (i.alpha * ux + i.gamma * uy) / uz
    ny = i.n0y + i.beta * uy / uz
    return np.array([nx, ny])


def write_truth_fixture(path, truth: CameraParameters | None = None):
    """Regenerate the default-truth fixture.

    The default camera sits 600 mm out on the positive octant diagonal, close
    enough that the pattern spans most of a 1280 x 720 frame.
    """
    from .formats import save_camera

    if truth is None:
        position = 600.0 * np.ones(3) / np.sqrt(3.0)
        A = look_at(position)
        intr = Intrinsics(-900.0, -905.0, 0.0, 640.0, 360.0)
        truth = CameraParameters.from_pose(intr, Extrinsics.from_world_position(A, position))
    save_camera(path, truth)
    return truth


__all__ = [
    "SyntheticScene",
    "trihedral_grid",
    "look_at",
    "default_truth",
    "random_truth",
    "render",
    "make_scene",
    "independent_project",
    "write_truth_fixture",
]
