"""Pinhole camera calibration from a trihedral chessboard and point tracking.

Typical use::

    from camtrack import calibrate, table1_points
    params, report = calibrate(table1_points())
"""

from .calibration import (
    BVector,
    CalibrationPoint,
    CalibrationReport,
    Homography,
    PlaneLabel,
    calibrate,
    estimate_homography,
    extrinsics_from_homography,
    intrinsics_from_B,
    orthonormalize,
    refine,
    reprojection_error,
    solve_B,
    unify_extrinsics,
)
from .datasets import TABLE1, table1_points
from .errors import CamtrackError, InputError, NumericalError
from .formats import load_camera, load_correspondences, save_camera, save_correspondences
from .geometry import (
    CameraParameters,
    Extrinsics,
    Intrinsics,
    dehom,
    hom,
    intrinsics_from_physical,
    matrix_to_rodriguez,
    project,
    rodriguez_to_matrix,
)
from .tracking import (
    CalibratedCamera,
    PlaneConstraint,
    SurfaceConstraint,
    sphere,
    track_plane,
    track_plane_xy,
    track_stereo,
    track_surface,
)

__version__ = "0.1.0"
