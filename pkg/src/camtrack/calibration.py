"""Single-shot calibration from a trihedral chessboard pattern.

The pattern is three mutually perpendicular planes (world XY, XZ and YZ)
observed in one image. Calibration runs four steps:

1. one homography per plane, as the null vector of the stacked DLT rows;
2. the intrinsics, from the symmetric matrix ``B = K^-T K^-1`` constrained by
   the orthonormality of each plane's two in-plane axes;
3. one pose per plane from its homography, each averaged with the others in
   Rodriguez parameters;
4. Nelder-Mead refinement of the 11 camera parameters against the summed
   squared pixel reprojection error.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field

import numpy as np

from . import numerics
from .errors import (
    CamtrackError,
    DegenerateConfiguration,
    DegenerateProjection,
    InconsistentB,
    InsufficientPoints,
    SingularInput,
    SingularIntrinsics,
    ValidationError,
)
from .geometry import (
    CameraParameters,
    Extrinsics,
    Intrinsics,
    hom,
    intrinsics_matrix,
    matrix_to_rodriguez,
    rodriguez_to_matrix,
)

logger = logging.getLogger(__name__)

MIN_POINTS_PER_PLANE = 5
# ratio between the two smallest eigenvalues below which the null space is ambiguous
EIGEN_GAP_RATIO = 1e3


class PlaneLabel(str, enum.Enum):
    XY = "XY"
    XZ = "XZ"
    YZ = "YZ"

    @property
    def axes(self) -> tuple[int, int]:
        """World coordinate indices spanning the plane, in homography column order."""
        return {"XY": (0, 1), "XZ": (0, 2), "YZ": (1, 2)}[self.value]

    @property
    def zero_axis(self) -> int:
        return {"XY": 2, "XZ": 1, "YZ": 0}[self.value]


@dataclass(frozen=True, eq=False)
class CalibrationPoint:
    image: np.ndarray
    world: np.ndarray
    plane: PlaneLabel

    def __post_init__(self):
        image = np.array(self.image, dtype=float).reshape(2)
        world = np.array(self.world, dtype=float).reshape(3)
        plane = PlaneLabel(self.plane)
        if not (np.all(np.isfinite(image)) and np.all(np.isfinite(world))):
            raise ValidationError("non-finite coordinate")
        if world[plane.zero_axis] != 0.0:
            axis = "xyz"[plane.zero_axis]
            raise ValidationError(f"r{axis} must be exactly 0 for a {plane.value} point, got {world[plane.zero_axis]}")
        image.setflags(write=False)
        world.setflags(write=False)
        object.__setattr__(self, "image", image)
        object.__setattr__(self, "world", world)
        object.__setattr__(self, "plane", plane)

    @property
    def planar(self) -> np.ndarray:
        return self.world[list(self.plane.axes)]

    def __eq__(self, other):
        if not isinstance(other, CalibrationPoint):
            return NotImplemented
        return (
            self.plane is other.plane
            and np.array_equal(self.image, other.image)
            and np.array_equal(self.world, other.world)
        )

    def __repr__(self):
        return f"CalibrationPoint({self.plane.value}, image={self.image.tolist()}, world={self.world.tolist()})"


def stack_points(points) -> tuple[np.ndarray, np.ndarray]:
    """``(N, 2)`` image and ``(N, 3)`` world arrays from a point list."""
    points = list(points)
    image = np.array([p.image for p in points], dtype=float).reshape(-1, 2)
    world = np.array([p.world for p in points], dtype=float).reshape(-1, 3)
    return image, world


# ---------------------------------------------------------------------------
# step 1: homographies
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Homography:
    """Plane-to-image homography, unit Frobenius norm.

    ``centroid`` is the mean planar coordinate of the points it was fitted to;
    the sign of ``H`` is chosen so the projective scale at the centroid is
    positive (the plane sits in front of the camera).
    """

    H: np.ndarray
    plane: PlaneLabel
    residual: float = 0.0
    centroid: np.ndarray = field(default_factory=lambda: np.zeros(2))
    eigenvalues: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "H", np.array(self.H, dtype=float).reshape(3, 3))
        object.__setattr__(self, "plane", PlaneLabel(self.plane))
        object.__setattr__(self, "centroid", np.array(self.centroid, dtype=float).reshape(2))

    @property
    def vector(self) -> np.ndarray:
        """Row-major 9-vector of ``H``."""
        return self.H.reshape(9)

    def scaled(self, k: float) -> "Homography":
        return Homography(k * self.H, self.plane, self.residual, self.centroid, self.eigenvalues)

    def normalized(self) -> np.ndarray:
        """``H`` at unit Frobenius norm with the in-front-of-camera sign."""
        H = self.H / np.linalg.norm(self.H)
        if H[2] @ hom(self.centroid) < 0:
            H = -H
        return H

    def apply(self, planar) -> np.ndarray:
        h = hom(planar) @ self.H.T
        return h[..., :2] / h[..., 2:]


def build_L_rows(image, planar) -> np.ndarray:
    """The two DLT rows one correspondence contributes (columns follow row-major ``H``)."""
    nx, ny = np.asarray(image, dtype=float).reshape(2)
    x, y = np.asarray(planar, dtype=float).reshape(2)
    return np.array(
        [
            [-x, -y, -1.0, 0.0, 0.0, 0.0, nx * x, nx * y, nx],
            [0.0, 0.0, 0.0, -x, -y, -1.0, ny * x, ny * y, ny],
        ]
    )


def build_L(image, planar) -> np.ndarray:
    image = np.asarray(image, dtype=float).reshape(-1, 2)
    planar = np.asarray(planar, dtype=float).reshape(-1, 2)
    return np.vstack([build_L_rows(n, r) for n, r in zip(image, planar)])


def _check_gap(eigenvalues: np.ndarray, what: str):
    lo, second = eigenvalues[0], eigenvalues[1]
    if second <= EIGEN_GAP_RATIO * max(lo, 0.0):
        raise DegenerateConfiguration(
            f"{what}: null space is ambiguous (two smallest eigenvalues {lo:.3e}, {second:.3e})"
        )


def _points_in_plane(points, plane: PlaneLabel):
    return [p for p in points if p.plane is plane]


def estimate_homography(points, plane) -> Homography:
    """Fit the homography of ``plane`` from the points lying in it.

    Raises:
        InsufficientPoints: fewer than 5 distinct points in the plane.
        DegenerateConfiguration: collinear points, or an eigenvalue gap too
            small to single out the null vector.
    """
    plane = PlaneLabel(plane)
    pts = _points_in_plane(points, plane)
    image, world = stack_points(pts)
    planar = world[:, list(plane.axes)]
    distinct = {tuple(r) for r in planar}
    if len(distinct) < MIN_POINTS_PER_PLANE:
        raise InsufficientPoints(
            f"plane {plane.value} has {len(distinct)} distinct points, need at least {MIN_POINTS_PER_PLANE}"
        )
    if np.linalg.matrix_rank(planar - planar.mean(axis=0)) < 2:
        raise DegenerateConfiguration(f"plane {plane.value}: calibration points are collinear")

    L = build_L(image, planar)
    eig = numerics.sym_eig(L.T @ L)
    _check_gap(eig.eigenvalues, f"homography {plane.value}")
    h = numerics.min_eigvec(L.T @ L)
    centroid = planar.mean(axis=0)
    H = h.reshape(3, 3)
    if H[2] @ hom(centroid) < 0:
        H = -H
    residual = float(np.linalg.norm(L @ H.reshape(9)))
    return Homography(H, plane, residual, centroid, eig.eigenvalues)


# ---------------------------------------------------------------------------
# step 2: intrinsics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BVector:
    """Entries of the symmetric ``B`` matrix, packed ``(B11, B12, B22, B13, B23, B33)``."""

    B11: float
    B12: float
    B22: float
    B13: float
    B23: float
    B33: float

    @classmethod
    def from_array(cls, b) -> "BVector":
        return cls(*np.asarray(b, dtype=float).reshape(6))

    @classmethod
    def from_intrinsics(cls, i: Intrinsics, scale: float = 1.0) -> "BVector":
        Kinv = np.linalg.inv(intrinsics_matrix(i))
        return cls.from_matrix(scale * Kinv.T @ Kinv)

    @classmethod
    def from_matrix(cls, B) -> "BVector":
        B = np.asarray(B, dtype=float)
        return cls(B[0, 0], B[0, 1], B[1, 1], B[0, 2], B[1, 2], B[2, 2])

    def as_array(self) -> np.ndarray:
        return np.array([self.B11, self.B12, self.B22, self.B13, self.B23, self.B33])

    @property
    def matrix(self) -> np.ndarray:
        return np.array(
            [
                [self.B11, self.B12, self.B13],
                [self.B12, self.B22, self.B23],
                [self.B13, self.B23, self.B33],
            ]
        )


def build_v(H, i: int, j: int) -> np.ndarray:
    """Row ``v_ij`` with ``v_ij @ b == h_i.T @ B @ h_j`` for packed ``b``.

    ``i`` and ``j`` are 1-based column indices of ``H``.
    """
    H = H.H if isinstance(H, Homography) else np.asarray(H, dtype=float)
    if i not in (1, 2, 3) or j not in (1, 2, 3):
        raise ValueError("column indices are 1-based")
    hi = H[:, i - 1]
    hj = H[:, j - 1]
    return np.array(
        [
            hi[0] * hj[0],
            hi[0] * hj[1] + hi[1] * hj[0],
            hi[1] * hj[1],
            hi[2] * hj[0] + hi[0] * hj[2],
            hi[2] * hj[1] + hi[1] * hj[2],
            hi[2] * hj[2],
        ]
    )


def build_V(homographies) -> np.ndarray:
    rows = []
    for hg in homographies:
        H = hg.normalized() if isinstance(hg, Homography) else np.asarray(hg, dtype=float)
        rows.append(build_v(H, 1, 2))
        rows.append(build_v(H, 1, 1) - build_v(H, 2, 2))
    return np.vstack(rows)


def solve_B(h_xy: Homography, h_xz: Homography, h_yz: Homography) -> BVector:
    """Least-squares ``B`` from the three plane homographies, with ``B11 > 0``."""
    V = build_V([h_xy, h_xz, h_yz])
    VtV = V.T @ V
    eig = numerics.sym_eig(VtV)
    _check_gap(eig.eigenvalues, "B matrix")
    b = numerics.min_eigvec(VtV)
    if b[0] < 0:
        b = -b
    return BVector.from_array(b)


def intrinsics_from_B(b: BVector) -> Intrinsics:
    """Closed-form intrinsics from ``B`` (known only up to a positive scale).

    Raises:
        InconsistentB: naming the inequality that fails.
    """
    B11, B12, B22, B13, B23, B33 = b.as_array()
    if not B11 > 0:
        raise InconsistentB(f"B11 > 0 violated (B11 = {B11:.6g})")
    det2 = B11 * B22 - B12 * B12
    if not det2 > 0:
        raise InconsistentB(f"B11*B22 - B12^2 > 0 violated ({det2:.6g})")
    n0y = (B12 * B13 - B11 * B23) / det2
    lam = B33 - (B13 * B13 + n0y * (B12 * B13 - B11 * B23)) / B11
    if not lam / B11 > 0:
        raise InconsistentB(f"lambda / B11 > 0 violated (lambda = {lam:.6g})")
    alpha = -np.sqrt(lam / B11)
    beta = -np.sqrt(lam * B11 / det2)
    gamma = -B12 * alpha * alpha * beta / lam
    n0x = gamma * n0y / beta - B13 * alpha * alpha / lam
    return Intrinsics(float(alpha), float(beta), float(gamma), float(n0x), float(n0y))


# ---------------------------------------------------------------------------
# step 3: extrinsics
# ---------------------------------------------------------------------------


def orthonormalize(A) -> np.ndarray:
    """Closest proper rotation to ``A`` in Frobenius norm (``U V^T`` from its SVD)."""
    A = np.asarray(A, dtype=float)
    svd = numerics.svd3(A)
    if svd.S[2] <= 1e-14 * svd.S[0] or svd.S[0] == 0.0:
        raise SingularInput("cannot orthonormalize a singular matrix")
    U = svd.U.copy()
    R = U @ svd.V.T
    if np.linalg.det(R) < 0:
        U[:, 2] = -U[:, 2]
        R = U @ svd.V.T
    return R


def extrinsics_from_homography(hg: Homography, intrinsics: Intrinsics) -> tuple[Extrinsics, float, float]:
    """Camera pose implied by one plane's homography.

    Returns the pose and the two unit-length scale estimates ``e1`` and
    ``e2`` taken from the first two homography columns; they agree for exact
    data.
    """
    K = intrinsics_matrix(intrinsics)
    if abs(np.linalg.det(K)) < 1e-300:
        raise SingularIntrinsics("intrinsic matrix is singular")
    Kinv = np.linalg.inv(K)
    H = hg.normalized()
    q1 = Kinv @ H[:, 0]
    q2 = Kinv @ H[:, 1]
    e1 = 1.0 / np.linalg.norm(q1)
    e2 = 1.0 / np.linalg.norm(q2)
    a = e1 * q1
    b = e2 * q2
    if hg.plane is PlaneLabel.XY:
        i_, j_ = a, b
        k_ = np.cross(i_, j_)
    elif hg.plane is PlaneLabel.XZ:
        i_, k_ = a, b
        j_ = np.cross(k_, i_)
    else:
        j_, k_ = a, b
        i_ = np.cross(j_, k_)
    # columns are the world axes seen from the camera, i.e. A_cam transposed
    A_cam = orthonormalize(np.column_stack([i_, j_, k_]).T)
    r_cam_bar = -0.5 * (e1 + e2) * (Kinv @ H[:, 2])
    return Extrinsics(A_cam, r_cam_bar), float(e1), float(e2)


def unify_extrinsics(xy: Extrinsics, xz: Extrinsics, yz: Extrinsics) -> tuple[np.ndarray, np.ndarray]:
    """Average the three per-plane poses: mean Rodriguez vector and mean ``r_cam_bar``."""
    poses = (xy, xz, yz)
    g0 = np.mean([matrix_to_rodriguez(e.A_cam) for e in poses], axis=0)
    r0 = np.mean([e.r_cam_bar for e in poses], axis=0)
    return g0, r0


# ---------------------------------------------------------------------------
# step 4: refinement
# ---------------------------------------------------------------------------


@dataclass
class CalibrationReport:
    """Reprojection statistics of a calibration run (errors in pixels / pixels^2)."""

    initial_error: float
    final_error: float
    rms_reprojection: float
    per_point_errors: list[float]
    iterations: int
    history: list[float] = field(default_factory=list, repr=False)
    homography_residuals: dict[str, float] = field(default_factory=dict)
    scale_factors: dict[str, tuple[float, float]] = field(default_factory=dict)
    initial_parameters: CameraParameters | None = field(default=None, repr=False)

    def to_dict(self) -> dict:
        """The fields stored in a camera file's ``report`` block."""
        return {
            "initial_error": self.initial_error,
            "final_error": self.final_error,
            "rms_reprojection": self.rms_reprojection,
            "per_point_errors": list(self.per_point_errors),
            "iterations": self.iterations,
        }


def _projection_from_vector(p) -> np.ndarray:
    alpha, beta, gamma, n0x, n0y = p[:5]
    K = np.array([[alpha, gamma, n0x], [0.0, beta, n0y], [0.0, 0.0, 1.0]])
    A = rodriguez_to_matrix(p[5:8])
    return K @ np.hstack([A.T, -np.reshape(p[8:11], (3, 1))])


def _residuals(p, image, world_h) -> np.ndarray:
    h = world_h @ _projection_from_vector(p).T
    return (h[:, :2] / h[:, 2:] - image).ravel()


def reprojection_error(params: CameraParameters, points) -> tuple[float, list[float]]:
    """Summed squared pixel error ``E`` and the per-point distances.

    Raises:
        DegenerateProjection: if a point lies in the camera plane; the
            message and ``index`` identify it.
    """
    points = list(points)
    if not points:
        raise InsufficientPoints("reprojection error needs at least one point")
    image, world = stack_points(points)
    h = hom(world) @ params.projection.T
    c = h[:, 2]
    bad = np.flatnonzero(np.abs(c) <= 1e-12)
    if bad.size:
        i = int(bad[0])
        raise DegenerateProjection(f"point {i} ({points[i]!r}) projects with scale factor ~ 0", index=i)
    eps = np.linalg.norm(h[:, :2] / c[:, None] - image, axis=1)
    # summation in input order; sorting keeps E exactly permutation invariant
    E = float(np.sum(np.sort(eps * eps)))
    return E, eps.tolist()


def _parameter_scales(p0: np.ndarray) -> np.ndarray:
    focal = max(abs(p0[0]), abs(p0[1]), 1.0)
    dist = max(np.linalg.norm(p0[8:11]), 1.0)
    return np.concatenate([np.full(5, focal), np.ones(3), np.full(3, dist)])


def _whitening(residuals, x0: np.ndarray) -> np.ndarray:
    """Linear map ``T`` making the error locally isotropic around ``x0``.

    ``T = V diag(1/s)`` from the SVD of a central-difference Jacobian of the
    residuals, so the simplex search sees ``E(x0 + T z) ~ |r0 + U z|^2``.
    """
    d = 1e-6 * _parameter_scales(x0)
    cols = []
    for k in range(x0.size):
        e = np.zeros(x0.size)
        e[k] = d[k]
        cols.append((residuals(x0 + e) - residuals(x0 - e)) / (2.0 * d[k]))
    J = np.column_stack(cols)
    _, s, vt = np.linalg.svd(J, full_matrices=False)
    if not np.all(np.isfinite(s)) or s[0] == 0.0:
        return np.diag(0.01 * _parameter_scales(x0))
    return vt.T / np.maximum(s, 1e-12 * s[0])


def refine(p0: CameraParameters, points, max_iter: int = 2000) -> tuple[CameraParameters, CalibrationReport]:
    """Minimize the summed squared reprojection error over all 11 parameters.

    The simplex search runs in coordinates whitened by the residual Jacobian
    at ``p0``; it stops early once the RMS error is below 1e-9 px. The
    returned error never exceeds the starting one: if the search fails to
    improve, ``p0`` is returned unchanged.
    """
    points = list(points)
    image, world = stack_points(points)
    world_h = hom(world)
    x0 = p0.to_vector()
    E0, _ = reprojection_error(p0, points)
    floor = len(points) * 1e-18

    def residuals(x):
        return _residuals(x, image, world_h)

    best = p0
    nit = 0
    history = [E0]
    if E0 > floor:
        T = _whitening(residuals, x0)
        res = numerics.minimize(
            lambda z: float(np.sum(residuals(x0 + T @ z) ** 2)),
            np.zeros(x0.size),
            max_iter=max_iter,
            ftol_abs=floor,
            step=np.sqrt(E0),
        )
        nit = res.nit
        history = [min(h, E0) for h in res.history]
        if res.fun < E0:
            try:
                best = CameraParameters.from_vector(x0 + T @ res.x)
            except CamtrackError:
                best = p0
    E, eps = reprojection_error(best, points)
    if E > E0:
        best = p0
        E, eps = reprojection_error(p0, points)
    report = CalibrationReport(
        initial_error=E0,
        final_error=E,
        rms_reprojection=float(np.sqrt(E / len(points))),
        per_point_errors=eps,
        iterations=nit,
        history=history,
        initial_parameters=p0,
    )
    logger.debug("refine: E %.6g -> %.6g in %d iterations", E0, E, nit)
    return best, report


# ---------------------------------------------------------------------------
# full pipeline
# ---------------------------------------------------------------------------


def _annotate(step: str, exc: CamtrackError) -> CamtrackError:
    try:
        new = type(exc)(f"{step}: {exc}")
    except TypeError:
        return exc
    for attr in ("index", "indices"):
        if hasattr(exc, attr):
            setattr(new, attr, getattr(exc, attr))
    return new


def initial_estimate(points) -> tuple[CameraParameters, dict]:
    """Steps 1-3: the closed-form camera estimate and its diagnostics."""
    points = list(points)
    empty = [pl.value for pl in PlaneLabel if len(_points_in_plane(points, pl)) < MIN_POINTS_PER_PLANE]
    if empty:
        raise InsufficientPoints(
            f"step 1 (homographies): planes without at least {MIN_POINTS_PER_PLANE} points: {', '.join(empty)}"
        )
    try:
        hgs = {pl: estimate_homography(points, pl) for pl in PlaneLabel}
    except CamtrackError as exc:
        raise _annotate("step 1 (homographies)", exc) from exc
    try:
        intr = intrinsics_from_B(solve_B(hgs[PlaneLabel.XY], hgs[PlaneLabel.XZ], hgs[PlaneLabel.YZ]))
    except CamtrackError as exc:
        raise _annotate("step 2 (intrinsics)", exc) from exc
    try:
        poses = {pl: extrinsics_from_homography(hgs[pl], intr) for pl in PlaneLabel}
        g0, r0 = unify_extrinsics(*(poses[pl][0] for pl in PlaneLabel))
        p0 = CameraParameters(intr, g0, r0)
    except CamtrackError as exc:
        raise _annotate("step 3 (extrinsics)", exc) from exc
    diagnostics = {
        "homographies": hgs,
        "extrinsics": {pl: poses[pl][0] for pl in PlaneLabel},
        "scale_factors": {pl.value: (poses[pl][1], poses[pl][2]) for pl in PlaneLabel},
        "homography_residuals": {pl.value: hgs[pl].residual for pl in PlaneLabel},
    }
    return p0, diagnostics


def calibrate(points, refine_parameters: bool = True, max_iter: int = 2000):
    """Run the whole pipeline on a list of :class:`CalibrationPoint`.

    Needs at least five points in each of the XY, XZ and YZ planes. With
    ``refine_parameters=False`` the closed-form estimate is returned and the
    report's initial and final errors coincide.

    Returns:
        ``(CameraParameters, CalibrationReport)``
    """
    points = list(points)
    p0, diag = initial_estimate(points)
    try:
        if refine_parameters:
            params, report = refine(p0, points, max_iter=max_iter)
        else:
            E, eps = reprojection_error(p0, points)
            params = p0
            report = CalibrationReport(E, E, float(np.sqrt(E / len(points))), eps, 0, [E], initial_parameters=p0)
    except CamtrackError as exc:
        raise _annotate("step 4 (refinement)", exc) from exc
    report.homography_residuals = diag["homography_residuals"]
    report.scale_factors = diag["scale_factors"]
    return params, report
