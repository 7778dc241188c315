"""Train the boosted-tree classifier on synthetic faces and look at what it uses."""
import numpy as np

from emofuse.alignment import align
from emofuse.features import default_angle_table, feature_names, featurize, fit_stats, standardize
from emofuse.gbt import TrainConfig, feature_importance, predict_proba, train
from emofuse.labels import EMOTIONS
from emofuse.metrics import accuracy
from emofuse.synthetic import face_dataset

table = default_angle_table()
ids, faces, labels = face_dataset(25, seed=2)
X = np.array([featurize(align(faces[i]), table) for i in ids])
y = np.array([labels[i] for i in ids])

# hold out every fifth face
test = np.arange(len(y)) % 5 == 0
stats = fit_stats(X[~test])
Xz = standardize(X, stats)

cfg = TrainConfig(rounds=60, max_depth=3)
model = train(Xz[~test], y[~test], cfg, stats=stats)
print("train log-loss: %.3f -> %.3f" % (model.train_log_loss[0], model.train_log_loss[-1]))

p = predict_proba(model, Xz[test])
print("held-out accuracy: %.3f" % accuracy(p.argmax(1), y[test]))
print("first test face:", EMOTIONS[y[test][0]], "->", EMOTIONS[p[0].argmax()], "(%.2f)" % p[0].max())

rep = feature_importance(model)
names = feature_names(table)
print("important features:", len(rep.important),
      "(%d distances, %d angles)" % (rep.n_important_distances, rep.n_important_angles))
for i in np.argsort(rep.gain)[::-1][:5]:
    print("  %-10s gain %.1f" % (names[i], rep.gain[i]))
