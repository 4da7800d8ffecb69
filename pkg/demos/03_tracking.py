# coding: utf-8
# # Locating points with one calibrated camera
#
# A pixel only fixes a viewing ray. If the point is known to move on a plane
# or another surface, the ray meets it and the position follows.

# %%
import numpy as np

from camtrack.synth import default_truth
from camtrack.tracking import CalibratedCamera, PlaneConstraint, solve_surface, sphere, track_plane, track_plane_xy

cam = CalibratedCamera(default_truth())

# %% [markdown]
# ## On the floor (z = 0)

# %%
n = cam.project([75.0, 125.0, 0.0])
print("pixel", n, "->", track_plane_xy(cam, n))

# %% [markdown]
# ## On a tilted plane, 2x + z = 100

# %%
plane = PlaneConstraint(2.0, 0.0, 1.0, -100.0)
w = np.array([20.0, 60.0, 60.0])
print(track_plane(cam, plane, cam.project(w)), "expected", w)

# %% [markdown]
# ## On a ball
#
# Newton iteration from a rough guess. A ray generally hits a sphere twice;
# the guess picks which intersection is returned.

# %%
ball = sphere([100.0, 100.0, 100.0], 60.0)
w = np.array([100.0, 100.0, 100.0]) + 60.0 / np.sqrt(3.0)
sol = solve_surface(cam, ball, cam.project(w), guess=w * 1.15)
print(sol.point, "in", sol.iterations, "iterations; expected", w)
