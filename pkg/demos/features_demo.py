"""Distance and angle features for one aligned face, and z-scoring a batch."""
import numpy as np

from emofuse.alignment import LandmarkSet, align
from emofuse.features import (
    N_DISTANCES,
    default_angle_table,
    feature_names,
    featurize,
    fit_stats,
    pair_index,
    standardize,
)
from emofuse.synthetic import synthetic_face

rng = np.random.default_rng(1)
table = default_angle_table()

face = align(LandmarkSet(synthetic_face(3, rng)))
f = featurize(face, table)
names = feature_names(table)
print(len(f), "features:", N_DISTANCES, "distances +", len(table), "angles")

# distance between the mouth corners
k = pair_index(48, 54)
print(names[k], "=", round(f[k], 3))

# a few of the angles, in radians
for spec, value in list(zip(table, f[N_DISTANCES:]))[::7]:
    print("%-8s %-8s %.3f" % (spec.name, spec.region, value))

# standardize a batch with statistics fitted on it
batch = np.array([featurize(align(LandmarkSet(synthetic_face(k % 8, rng))), table) for k in range(40)])
stats = fit_stats(batch)
z = standardize(batch, stats)
print("z-scored mean %.1e, std %.3f" % (np.abs(z.mean(0)).max(), z.std(0)[~stats.constant].mean()))
