"""Bundled calibration data.

``TABLE1`` holds the 30 hand-measured correspondences of the trihedral
chessboard (10 per plane): ``(plane, nx, ny, rx, ry, rz)`` with pixels
measured from the top-left image corner and world coordinates in mm.
"""

from __future__ import annotations

from importlib import resources

TABLE1 = (
    ("XY", 674, 254, 25, 25, 0),
    ("XY", 686, 273, 75, 75, 0),
    ("XY", 697, 296, 125, 125, 0),
    ("XY", 712, 322, 175, 175, 0),
    ("XY", 709, 258, 25, 75, 0),
    ("XY", 745, 262, 25, 125, 0),
    ("XY", 782, 269, 25, 175, 0),
    ("XY", 651, 268, 75, 25, 0),
    ("XY", 627, 283, 125, 25, 0),
    ("XY", 599, 301, 175, 25, 0),
    ("XZ", 657, 232, 25, 0, 25),
    ("XZ", 629, 206, 75, 0, 75),
    ("XZ", 596, 177, 125, 0, 125),
    ("XZ", 558, 145, 175, 0, 175),
    ("XZ", 653, 193, 25, 0, 75),
    ("XZ", 647, 153, 25, 0, 125),
    ("XZ", 642, 110, 25, 0, 175),
    ("XZ", 633, 246, 75, 0, 25),
    ("XZ", 607, 261, 125, 0, 25),
    ("XZ", 579, 277, 175, 0, 25),
    ("YZ", 683, 227, 0, 25, 25),
    ("YZ", 714, 192, 0, 75, 75),
    ("YZ", 747, 154, 0, 125, 125),
    ("YZ", 784, 110, 0, 175, 175),
    ("YZ", 679, 189, 0, 25, 75),
    ("YZ", 675, 149, 0, 25, 125),
    ("YZ", 671, 106, 0, 25, 175),
    ("YZ", 717, 232, 0, 75, 25),
    ("YZ", 753, 236, 0, 125, 25),
    ("YZ", 791, 241, 0, 175, 25),
)


def table1_points():
    """Table 1 as a list of :class:`~camtrack.calibration.CalibrationPoint`."""
    from .calibration import CalibrationPoint

    return [CalibrationPoint((nx, ny), (rx, ry, rz), plane) for plane, nx, ny, rx, ry, rz in TABLE1]


def table1_csv_path():
    """Context manager yielding a filesystem path to the bundled ``table1.csv``."""
    return resources.as_file(resources.files("camtrack") / "data" / "table1.csv")


def default_truth_path():
    return resources.as_file(resources.files("camtrack") / "data" / "default_truth.json")
