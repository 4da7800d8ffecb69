# coding: utf-8
# # Calibrating a camera from one trihedral shot
#
# Thirty hand-measured points on three perpendicular chessboards (10 per
# plane) are enough to recover all 11 camera parameters. This script walks
# through the pipeline one step at a time on the bundled data.

# %%
import numpy as np

from camtrack import calibration as cal
from camtrack.datasets import table1_points

points = table1_points()
print(len(points), "points;", points[0])

# %% [markdown]
# ## Step 1: one homography per plane
#
# Each plane maps to the image through a 3x3 homography. It is the null
# vector of the stacked DLT rows, found as the eigenvector of `L^T L` with
# the smallest eigenvalue.

# %%
hgs = {pl: cal.estimate_homography(points, pl) for pl in cal.PlaneLabel}
for pl, hg in hgs.items():
    print(pl.value, "residual", f"{hg.residual:.3e}", "eigenvalues", hg.eigenvalues[:2])

# %% [markdown]
# ## Step 2: intrinsics from B
#
# Orthonormality of the rotation columns gives two linear constraints per
# plane on the symmetric matrix `B = K^-T K^-1`. Three planes give six, which
# is exactly enough for the five intrinsics plus the unknown scale.

# %%
b = cal.solve_B(hgs[cal.PlaneLabel.XY], hgs[cal.PlaneLabel.XZ], hgs[cal.PlaneLabel.YZ])
intr = cal.intrinsics_from_B(b)
print(intr)

# %% [markdown]
# ## Step 3: a pose from every plane, then their average

# %%
poses = {}
for pl, hg in hgs.items():
    e, e1, e2 = cal.extrinsics_from_homography(hg, intr)
    poses[pl] = e
    print(pl.value, "camera at", np.round(e.r_cam, 1), "mm; e1/e2 =", round(e1 / e2, 4))
g0, r0 = cal.unify_extrinsics(*poses.values())
p0 = cal.CameraParameters(intr, g0, r0)

# %% [markdown]
# ## Step 4: refine all 11 parameters on the reprojection error

# %%
params, report = cal.refine(p0, points)
print(f"E: {report.initial_error:.4f} -> {report.final_error:.4f} px^2 in {report.iterations} iterations")
print(f"RMS {report.rms_reprojection:.4f} px, worst point {max(report.per_point_errors):.4f} px")
print(params)

# %% [markdown]
# The same thing in one call, or from the shell with
# `camtrack calibrate --points table1.csv --out cam.json --report`:

# %%
params2, _ = cal.calibrate(points)
assert params2 == params
