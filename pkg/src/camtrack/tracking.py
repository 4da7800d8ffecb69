"""World positions of image points seen by calibrated cameras.

A single camera fixes only the viewing ray of a pixel, so one extra equation
is needed: the point moves on a known plane or surface. Two cameras fix the
point on their own through a small least-squares system.

Every solver treats the projective scale ``c`` of each view as an extra
unknown, ``c [n; 1] = P [r; 1]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import numerics
from .errors import NoConvergence, RankDeficient, SingularGeometry, SingularJacobian
from .geometry import CameraParameters, projection_matrix

COND_LIMIT = 1e12


@dataclass(frozen=True, eq=False)
class CalibratedCamera:
    """Camera parameters with the 3x4 projection matrix cached."""

    params: CameraParameters
    projection: np.ndarray = field(init=False)

    def __post_init__(self):
        P = projection_matrix(self.params.intrinsics, self.params.extrinsics)
        P.setflags(write=False)
        object.__setattr__(self, "projection", P)

    def project(self, p, return_scale: bool = False):
        return self.params.project(p, return_scale)


@dataclass(frozen=True)
class PlaneConstraint:
    """The plane ``A x + B y + C z + D = 0`` (``D`` in mm)."""

    A: float
    B: float
    C: float
    D: float

    def __post_init__(self):
        if self.A == 0 and self.B == 0 and self.C == 0:
            raise ValueError("plane normal (A, B, C) must be non-zero")

    @property
    def normal(self) -> np.ndarray:
        return np.array([self.A, self.B, self.C], dtype=float)

    def evaluate(self, r) -> float:
        return float(self.normal @ np.asarray(r, dtype=float) + self.D)

    def gradient(self, r) -> np.ndarray:
        return self.normal

    def as_surface(self) -> "SurfaceConstraint":
        return SurfaceConstraint(self.evaluate, self.gradient)


@dataclass(frozen=True)
class SurfaceConstraint:
    """Implicit surface ``f(r) = 0`` with its gradient."""

    evaluate: Callable[[np.ndarray], float]
    gradient: Callable[[np.ndarray], np.ndarray]


def sphere(center, radius: float) -> SurfaceConstraint:
    center = np.asarray(center, dtype=float)

    def f(r):
        d = np.asarray(r, dtype=float) - center
        return float(d @ d - radius * radius)

    def grad(r):
        return 2.0 * (np.asarray(r, dtype=float) - center)

    return SurfaceConstraint(f, grad)


def _as_camera(cam) -> CalibratedCamera:
    return cam if isinstance(cam, CalibratedCamera) else CalibratedCamera(cam)


def _solve_square(M: np.ndarray, b: np.ndarray, what: str) -> np.ndarray:
    if not np.all(np.isfinite(M)) or np.linalg.cond(M) > COND_LIMIT:
        raise SingularGeometry(f"{what}: viewing ray does not meet the constraint in a single point")
    return np.linalg.solve(M, b)


def track_plane_xy(cam, n) -> np.ndarray:
    """Point on the world XY plane seen at pixel ``n``.

    Solves the 3x3 system in ``(rx, ry, c)``.
    """
    P = _as_camera(cam).projection
    nh = np.array([n[0], n[1], 1.0])
    M = np.column_stack([P[:, 0], P[:, 1], -nh])
    x = _solve_square(M, -P[:, 3], "plane XY")
    return np.array([x[0], x[1], 0.0])


def track_plane(cam, plane: PlaneConstraint, n) -> np.ndarray:
    """Point on ``plane`` seen at pixel ``n`` (4x4 system in ``(r, c)``)."""
    P = _as_camera(cam).projection
    nh = np.array([n[0], n[1], 1.0])
    M = np.zeros((4, 4))
    M[:3, :3] = P[:, :3]
    M[:3, 3] = -nh
    M[3, :3] = plane.normal
    b = np.concatenate([-P[:, 3], [-plane.D]])
    x = _solve_square(M, b, "plane")
    return x[:3]


@dataclass
class SurfaceSolution:
    point: np.ndarray
    scale: float
    iterations: int
    residual: float


def _convergence_measure(res: np.ndarray, c: float) -> float:
    # image rows divided by the scale factor are in pixels; the surface row is raw
    return float(max(np.max(np.abs(res[:3])) / max(abs(c), 1.0), abs(res[3])))


def solve_surface(cam, surface: SurfaceConstraint, n, guess, tol: float = 1e-10, max_iter: int = 50) -> SurfaceSolution:
    """Damped Newton on ``[c [n;1] - P [r;1]; f(r)] = 0``.

    Convergence is declared when the infinity norm of the residual drops
    below ``tol``, with the three image rows divided by ``|c|`` so they read
    in pixels. The step is halved while it fails to reduce the residual norm. Converges
    to the intersection nearest (in the Newton sense) to ``guess``.

    Raises:
        NoConvergence: residual above ``tol`` (infinity norm) after ``max_iter`` steps.
        SingularJacobian: the Newton matrix is singular (ray tangent to the surface).
    """
    P = _as_camera(cam).projection
    nh = np.array([n[0], n[1], 1.0])
    r = np.asarray(guess, dtype=float).reshape(3).copy()
    c = float(P[2, :3] @ r + P[2, 3])

    def F(r, c):
        return np.concatenate([c * nh - (P[:, :3] @ r + P[:, 3]), [surface.evaluate(r)]])

    res = F(r, c)
    for it in range(max_iter + 1):
        err = _convergence_measure(res, c)
        if err < tol:
            return SurfaceSolution(r, c, it, err)
        if it == max_iter:
            break
        J = np.zeros((4, 4))
        J[:3, :3] = -P[:, :3]
        J[:3, 3] = nh
        J[3, :3] = surface.gradient(r)
        if not np.all(np.isfinite(J)) or np.linalg.cond(J) > COND_LIMIT:
            raise SingularJacobian("Newton matrix is singular; the viewing ray grazes the surface")
        step = np.linalg.solve(J, -res)
        norm0 = np.linalg.norm(res)
        lam = 1.0
        while True:
            r_new, c_new = r + lam * step[:3], c + lam * step[3]
            res_new = F(r_new, c_new)
            if np.linalg.norm(res_new) < norm0 or lam < 1e-10:
                break
            lam *= 0.5
        r, c, res = r_new, c_new, res_new
    raise NoConvergence(
        f"surface tracking did not converge in {max_iter} iterations (residual {_convergence_measure(res, c):.3e})"
    )


def track_surface(cam, surface: SurfaceConstraint, n, guess, tol: float = 1e-10, max_iter: int = 50) -> np.ndarray:
    """Point on an implicit surface seen at pixel ``n``; see :func:`solve_surface`.

    On a curved surface the ray may meet it twice; ``guess`` picks the branch.
    """
    return solve_surface(cam, surface, n, guess, tol, max_iter).point


def stereo_system(cam1, cam2, n1, n2) -> tuple[np.ndarray, np.ndarray]:
    """The 6x5 linear system in ``(rx, ry, rz, c1, c2)`` for two views."""
    P1 = _as_camera(cam1).projection
    P2 = _as_camera(cam2).projection
    M = np.zeros((6, 5))
    M[:3, :3] = P1[:, :3]
    M[3:, :3] = P2[:, :3]
    M[:3, 3] = -np.array([n1[0], n1[1], 1.0])
    M[3:, 4] = -np.array([n2[0], n2[1], 1.0])
    b = -np.concatenate([P1[:, 3], P2[:, 3]])
    return M, b


def track_stereo(cam1, cam2, n1, n2) -> tuple[np.ndarray, float]:
    """Triangulate a point seen at ``n1`` by ``cam1`` and ``n2`` by ``cam2``.

    Returns the world point and the 2-norm of the least-squares residual,
    with each camera's rows divided by its scale factor ``|c|`` so the value
    reads in pixels (zero for noise-free, consistent measurements).

    Raises:
        RankDeficient: identical cameras or parallel viewing rays.
    """
    M, b = stereo_system(cam1, cam2, n1, n2)
    # equilibrate columns so the rank test is not fooled by unit mismatch
    scale = np.linalg.norm(M, axis=0)
    if np.any(scale == 0):
        raise RankDeficient("stereo system has an empty column")
    try:
        y = numerics.lstsq(M / scale, b)
    except RankDeficient as exc:
        raise RankDeficient(f"stereo rays do not determine a point: {exc}") from exc
    x = y / scale
    res = M @ x - b
    res[:3] /= max(abs(x[3]), 1e-300)
    res[3:] /= max(abs(x[4]), 1e-300)
    residual = float(np.linalg.norm(res))
    return x[:3], residual
