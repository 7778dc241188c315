"""Confusion matrix, macro-F1 and accuracy by prediction entropy."""
import numpy as np

from emofuse.fusion import entropy
from emofuse.labels import EMOTIONS
from emofuse.metrics import evaluate, format_matrix
from emofuse.synthetic import two_branch_benchmark

truth, p_a, _ = two_branch_benchmark(n_per_class=200, seed=4)
report = evaluate(p_a.argmax(1), truth, entropy(p_a), bin_width=0.25)

print("accuracy %.4f, macro-F1 %.4f" % (report.accuracy, report.macro_f1))
print(format_matrix(report.confusion))

# confident rows (low entropy) should be right more often
for b in report.curve.bins:
    if b.n:
        print("[%.2f, %.2f)  n=%4d  acc=%.3f" % (b.lo, b.hi, b.n, b.accuracy))

worst = int(np.argmin(report.per_class_f1))
print("hardest class:", EMOTIONS[worst])
