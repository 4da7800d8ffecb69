"""Pinhole camera geometry.

Conventions used throughout the package:

* Pixel, camera-frame and world-frame points are plain numpy arrays of shape
  ``(2,)`` / ``(3,)`` (or ``(N, 2)`` / ``(N, 3)`` for batches).
* World coordinates and the camera position are in millimetres, intrinsics in
  pixels.
* The focal terms ``alpha`` and ``beta`` are negative for a physical camera,
  because the pinhole flips the image: ``alpha = beta = -f / s``.
* A visible point has a positive projective scale ``c`` (its depth along the
  optical axis).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateProjection,
    InvalidPhysical,
    NearPiRotation,
    PointAtInfinity,
    SingularIntrinsics,
)

ORTHO_TOL = 1e-9
SCALE_TOL = 1e-12


# ---------------------------------------------------------------------------
# homogeneous coordinates
# ---------------------------------------------------------------------------


def hom(v) -> np.ndarray:
    """Append a unit last component (works on single vectors and row batches)."""
    v = np.asarray(v, dtype=float)
    ones = np.ones(v.shape[:-1] + (1,))
    return np.concatenate([v, ones], axis=-1)


hom2 = hom
hom3 = hom


def dehom(v) -> np.ndarray:
    """Divide by the last component.

    Raises:
        PointAtInfinity: if the last component is negligible compared with
            the largest one (``|w| <= 1e-14 * max|v|``).
    """
    v = np.asarray(v, dtype=float)
    w = v[..., -1:]
    big = np.max(np.abs(v), axis=-1, keepdims=True)
    if np.any(np.abs(w) <= 1e-14 * big) or np.any(w == 0):
        raise PointAtInfinity(f"homogeneous vector has (near-)zero last component: {v.tolist()}")
    return v[..., :-1] / w


def hom_equivalent(a, b, tol: float = 1e-12) -> bool:
    """True when two homogeneous vectors are proportional (represent the same point)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    # every 2x2 minor a_i b_j - a_j b_i vanishes iff a and b are parallel
    minors = np.outer(a, b) - np.outer(b, a)
    return bool(np.max(np.abs(minors)) <= tol * np.linalg.norm(a) * np.linalg.norm(b))


# ---------------------------------------------------------------------------
# parameter containers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Intrinsics:
    """The five intrinsic parameters, all in pixels."""

    alpha: float
    beta: float
    gamma: float
    n0x: float
    n0y: float

    def __post_init__(self):
        vals = (self.alpha, self.beta, self.gamma, self.n0x, self.n0y)
        if not all(np.isfinite(vals)):
            raise SingularIntrinsics(f"non-finite intrinsics {vals}")
        if self.alpha == 0 or self.beta == 0:
            raise SingularIntrinsics("alpha and beta must be non-zero")

    @property
    def matrix(self) -> np.ndarray:
        return intrinsics_matrix(self)

    @property
    def principal_point(self) -> np.ndarray:
        return np.array([self.n0x, self.n0y])

    def as_array(self) -> np.ndarray:
        return np.array([self.alpha, self.beta, self.gamma, self.n0x, self.n0y])


def intrinsics_from_physical(f: float, s: float, Nx: float, Ny: float) -> Intrinsics:
    """Intrinsics of an ideal sensor: focal length ``f`` and pixel pitch ``s``
    in metres, ``Nx`` by ``Ny`` pixels, optical axis through the sensor centre."""
    for name, val in (("f", f), ("s", s), ("Nx", Nx), ("Ny", Ny)):
        if not (np.isfinite(val) and val > 0):
            raise InvalidPhysical(f"{name} must be positive, got {val}")
    focal = -f / s
    return Intrinsics(focal, focal, 0.0, Nx / 2.0, Ny / 2.0)


def intrinsics_matrix(i: Intrinsics) -> np.ndarray:
    return np.array(
        [
            [i.alpha, i.gamma, i.n0x],
            [0.0, i.beta, i.n0y],
            [0.0, 0.0, 1.0],
        ]
    )


def is_rotation(A, tol: float = ORTHO_TOL) -> bool:
    A = np.asarray(A, dtype=float)
    return (
        A.shape == (3, 3)
        and np.max(np.abs(A.T @ A - np.eye(3))) <= tol
        and abs(np.linalg.det(A) - 1.0) <= tol
    )


@dataclass(frozen=True, eq=False)
class Extrinsics:
    """Camera pose.

    Attributes:
        A_cam: rotation whose columns are the camera axes resolved in the
            world frame.
        r_cam_bar: camera position resolved in the camera frame, mm
            (``A_cam.T @ r_cam``).
    """

    A_cam: np.ndarray
    r_cam_bar: np.ndarray

    def __post_init__(self):
        A = np.array(self.A_cam, dtype=float)
        r = np.array(self.r_cam_bar, dtype=float).reshape(3)
        if not is_rotation(A):
            raise ValueError("A_cam must be a proper rotation (orthogonal within 1e-9, det +1)")
        A.setflags(write=False)
        r.setflags(write=False)
        object.__setattr__(self, "A_cam", A)
        object.__setattr__(self, "r_cam_bar", r)

    @classmethod
    def from_world_position(cls, A_cam, r_cam) -> "Extrinsics":
        A = np.asarray(A_cam, dtype=float)
        return cls(A, A.T @ np.asarray(r_cam, dtype=float))

    @property
    def r_cam(self) -> np.ndarray:
        """Camera position in the world frame, mm."""
        return self.A_cam @ self.r_cam_bar

    @property
    def matrix(self) -> np.ndarray:
        return extrinsics_matrix(self)


def extrinsics_matrix(e: Extrinsics) -> np.ndarray:
    """3x4 rigid transform ``[A_cam.T | -r_cam_bar]``."""
    return np.hstack([e.A_cam.T, -e.r_cam_bar.reshape(3, 1)])


def world_to_camera(e: Extrinsics, p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    return (p - e.r_cam) @ e.A_cam


def camera_to_world(e: Extrinsics, u) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    return e.r_cam + u @ e.A_cam.T


def projection_matrix(i: Intrinsics, e: Extrinsics) -> np.ndarray:
    return intrinsics_matrix(i) @ extrinsics_matrix(e)


def project(i: Intrinsics, e: Extrinsics, p, return_scale: bool = False):
    """Pixel position of world point(s) ``p``.

    With ``return_scale=True`` also returns the projective scale ``c``
    (positive in front of the camera).

    Raises:
        DegenerateProjection: if some point lies in the camera's focal plane
            (``|c| <= 1e-12``); ``index`` names the first offender for batches.
    """
    P = projection_matrix(i, e)
    return project_with(P, p, return_scale)


def project_with(P, p, return_scale: bool = False):
    p = np.asarray(p, dtype=float)
    h = hom(p) @ P.T
    c = h[..., 2]
    bad = np.abs(c) <= SCALE_TOL
    if np.any(bad):
        idx = int(np.flatnonzero(np.atleast_1d(bad))[0]) if p.ndim > 1 else None
        raise DegenerateProjection("point lies in the camera plane (scale factor ~ 0)", index=idx)
    n = h[..., :2] / c[..., None]
    if return_scale:
        return n, c
    return n


# ---------------------------------------------------------------------------
# Rodriguez (Gibbs) parameters
# ---------------------------------------------------------------------------


def skew(g) -> np.ndarray:
    g = np.asarray(g, dtype=float)
    return np.array(
        [
            [0.0, -g[2], g[1]],
            [g[2], 0.0, -g[0]],
            [-g[1], g[0], 0.0],
        ]
    )


def rodriguez_to_matrix(g) -> np.ndarray:
    """Rotation matrix from Rodriguez parameters ``g = tan(angle/2) * axis``."""
    g = np.asarray(g, dtype=float).reshape(3)
    if not np.all(np.isfinite(g)):
        raise ValueError(f"non-finite Rodriguez parameters {g}")
    G = skew(g)
    return np.eye(3) + 2.0 / (1.0 + g @ g) * (G + G @ G)


def matrix_to_rodriguez(A, angle_margin: float = 1e-6) -> np.ndarray:
    """Inverse of :func:`rodriguez_to_matrix`.

    ``g = (A32 - A23, A13 - A31, A21 - A12) / (1 + trace(A))``.

    Raises:
        NearPiRotation: if the rotation angle is within ``angle_margin`` of pi,
            where the parameters blow up.
    """
    A = np.asarray(A, dtype=float)
    if not is_rotation(A):
        raise ValueError("matrix_to_rodriguez expects a proper rotation matrix")
    denom = 1.0 + np.trace(A)
    # 1 + trace = 2 + 2 cos(angle) = 4 cos^2(angle / 2)
    if denom <= 4.0 * np.sin(0.5 * angle_margin) ** 2:
        raise NearPiRotation("rotation angle too close to pi for Rodriguez parameters")
    return np.array([A[2, 1] - A[1, 2], A[0, 2] - A[2, 0], A[1, 0] - A[0, 1]]) / denom


def axis_angle_to_matrix(axis, angle: float) -> np.ndarray:
    """Rodrigues' rotation formula; used as an independent reference."""
    k = np.asarray(axis, dtype=float)
    k = k / np.linalg.norm(k)
    K = skew(k)
    return np.eye(3) + np.sin(angle) * K + (1.0 - np.cos(angle)) * (K @ K)


def rotation_x(angle: float) -> np.ndarray:
    return axis_angle_to_matrix([1.0, 0.0, 0.0], angle)


# ---------------------------------------------------------------------------
# the 11-parameter camera
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class CameraParameters:
    """Intrinsics plus pose as Rodriguez parameters and camera-frame position.

    Packs to the 11-vector ``(alpha, beta, gamma, n0x, n0y, g1, g2, g3, r1, r2, r3)``.
    """

    intrinsics: Intrinsics
    g: np.ndarray
    r_cam_bar: np.ndarray

    def __post_init__(self):
        g = np.array(self.g, dtype=float).reshape(3)
        r = np.array(self.r_cam_bar, dtype=float).reshape(3)
        g.setflags(write=False)
        r.setflags(write=False)
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "r_cam_bar", r)

    @property
    def extrinsics(self) -> Extrinsics:
        return Extrinsics(rodriguez_to_matrix(self.g), self.r_cam_bar)

    @property
    def projection(self) -> np.ndarray:
        return projection_matrix(self.intrinsics, self.extrinsics)

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.intrinsics.as_array(), self.g, self.r_cam_bar])

    @classmethod
    def from_vector(cls, p) -> "CameraParameters":
        p = np.asarray(p, dtype=float).reshape(11)
        return cls(Intrinsics(*p[:5]), p[5:8], p[8:11])

    @classmethod
    def from_pose(cls, intrinsics: Intrinsics, extrinsics: Extrinsics) -> "CameraParameters":
        return cls(intrinsics, matrix_to_rodriguez(extrinsics.A_cam), extrinsics.r_cam_bar)

    def project(self, p, return_scale: bool = False):
        return project_with(self.projection, p, return_scale)

    def __eq__(self, other):
        if not isinstance(other, CameraParameters):
            return NotImplemented
        return bool(np.array_equal(self.to_vector(), other.to_vector()))

    def __repr__(self):
        i = self.intrinsics
        return (
            f"CameraParameters(alpha={i.alpha:.6g}, beta={i.beta:.6g}, gamma={i.gamma:.6g}, "
            f"n0=({i.n0x:.6g}, {i.n0y:.6g}), g={np.round(self.g, 6).tolist()}, "
            f"r_cam_bar={np.round(self.r_cam_bar, 4).tolist()})"
        )
