"""Put a tilted, rescaled face into the canonical frame and check it lands
where the untouched face does."""
import math

import numpy as np

from emofuse.alignment import LandmarkSet, align, roll_angle
from emofuse.synthetic import random_pose, synthetic_face

rng = np.random.default_rng(0)

# an upright happy face on the 200x200 canvas
upright = LandmarkSet(synthetic_face(1, rng))

# same face, tilted and placed on a larger photo
posed = random_pose(upright.points, rng)
print("source canvas:", posed.src_width, "x", posed.src_height)

a = align(upright)
b = align(posed)
print("roll removed (deg): %.2f vs %.2f" % (math.degrees(a.roll_applied), math.degrees(b.roll_applied)))
print("nose tip:", b.points[33])             # always (100, 100)
print("bridge above tip:", b.points[27])     # x = 100, 50 units up
print("eye width:", b.points[39, 0] - b.points[36, 0])
print("max difference after alignment: %.2e" % np.abs(a.points - b.points).max())

# the aligned face is upright by construction
print("residual roll:", roll_angle(b.as_landmark_set()))
