"""Evaluation of 8-way predictions: confusion matrices, accuracy, F1, kappa,
entropy-binned accuracy and the two-classifier agreement breakdown."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .fusion import MAX_ENTROPY
from .labels import EMOTIONS, N_CLASSES, check_labels

DEFAULT_BIN_WIDTH = 0.1


def _paired(*seqs):
    arrays = [check_labels(s) for s in seqs]
    n = len(arrays[0])
    if any(len(a) != n for a in arrays):
        raise InvalidInputError(f"length mismatch: {[len(a) for a in arrays]}")
    if n == 0:
        raise InvalidInputError("need at least one item")
    return arrays


@dataclass(frozen=True)
class ConfusionMatrix:
    """Counts with rows indexed by the first labelling and columns by the second."""

    counts: np.ndarray

    @property
    def total(self):
        return int(self.counts.sum())

    @property
    def empty_rows(self):
        return self.counts.sum(axis=1) == 0

    @property
    def row_normalized(self):
        sums = self.counts.sum(axis=1, keepdims=True)
        return np.divide(self.counts, sums, out=np.zeros(self.counts.shape), where=sums > 0)

    def to_dict(self):
        return {
            "labels": list(EMOTIONS),
            "counts": self.counts.tolist(),
            "row_normalized": self.row_normalized.tolist(),
            "empty_rows": self.empty_rows.tolist(),
        }


def _counts(rows, cols):
    return np.bincount(rows * N_CLASSES + cols, minlength=N_CLASSES**2).reshape(N_CLASSES, N_CLASSES)


def confusion_matrix(preds, truth):
    """Rows are true labels, columns predicted labels."""
    preds, truth = _paired(preds, truth)
    return ConfusionMatrix(_counts(truth, preds))


def cross_method_matrix(preds_a, preds_b):
    """Rows are method A's predictions, columns method B's."""
    preds_a, preds_b = _paired(preds_a, preds_b)
    return ConfusionMatrix(_counts(preds_a, preds_b))


def accuracy(preds, truth):
    preds, truth = _paired(preds, truth)
    return int(np.sum(preds == truth)) / len(truth)


def macro_f1(preds, truth):
    """Unweighted mean of per-class F1 over all 8 classes, plus the per-class values."""
    cm = confusion_matrix(preds, truth).counts
    tp = np.diag(cm).astype(np.float64)
    # F1 = 2TP / (2TP + FP + FN), which equals 2PR/(P+R) and is 0 when undefined
    denom = cm.sum(axis=0) + cm.sum(axis=1)
    per_class = np.divide(2 * tp, denom, out=np.zeros(N_CLASSES), where=denom > 0)
    return float(per_class.mean()), per_class


def cohens_kappa(preds_a, preds_b):
    preds_a, preds_b = _paired(preds_a, preds_b)
    n = len(preds_a)
    p_o = np.sum(preds_a == preds_b) / n
    p_e = float(np.dot(np.bincount(preds_a, minlength=N_CLASSES), np.bincount(preds_b, minlength=N_CLASSES))) / (n * n)
    if p_e == 1.0:
        return 1.0
    return float((p_o - p_e) / (1.0 - p_e))


@dataclass(frozen=True)
class AgreementReport:
    n_total: int
    n_agree: int
    n_disagree: int
    n_both_correct_when_agree: int
    n_higher_conf_correct: int
    n_lower_conf_correct: int
    n_neither_correct: int
    n_confidence_ties: int
    kappa: float

    def to_dict(self):
        return dict(self.__dict__)


def agreement_breakdown(preds_a, preds_b, conf_a, conf_b, truth):
    """How two classifiers split on shared items.

    On disagreements the method with the strictly higher confidence is the
    "higher" one; exact ties count method A as higher and are tallied
    separately.
    """
    preds_a, preds_b, truth = _paired(preds_a, preds_b, truth)
    conf_a = np.asarray(conf_a, dtype=np.float64)
    conf_b = np.asarray(conf_b, dtype=np.float64)
    if conf_a.shape != preds_a.shape or conf_b.shape != preds_a.shape:
        raise InvalidInputError("confidence arrays must match the prediction length")

    agree = preds_a == preds_b
    dis = ~agree
    a_higher = conf_a >= conf_b
    higher_pred = np.where(a_higher, preds_a, preds_b)
    lower_pred = np.where(a_higher, preds_b, preds_a)
    higher_ok = dis & (higher_pred == truth)
    lower_ok = dis & (lower_pred == truth)
    return AgreementReport(
        n_total=len(truth),
        n_agree=int(agree.sum()),
        n_disagree=int(dis.sum()),
        n_both_correct_when_agree=int(np.sum(agree & (preds_a == truth))),
        n_higher_conf_correct=int(higher_ok.sum()),
        n_lower_conf_correct=int(lower_ok.sum()),
        n_neither_correct=int(np.sum(dis & ~higher_ok & ~lower_ok)),
        n_confidence_ties=int(np.sum(dis & (conf_a == conf_b))),
        kappa=cohens_kappa(preds_a, preds_b),
    )


@dataclass(frozen=True)
class EntropyBin:
    lo: float
    hi: float
    n: int
    n_correct: int

    @property
    def accuracy(self):
        """None for an empty bin."""
        return self.n_correct / self.n if self.n else None

    def to_dict(self):
        return {"lo": self.lo, "hi": self.hi, "n": self.n, "accuracy": self.accuracy}


@dataclass(frozen=True)
class EntropyAccuracyCurve:
    bins: tuple

    def to_dict(self):
        return [b.to_dict() for b in self.bins]


def entropy_accuracy_curve(preds, truth, entropies, bin_width=DEFAULT_BIN_WIDTH):
    """Accuracy within contiguous entropy bins [k*w, (k+1)*w) covering [0, ln 8].

    The last bin is closed on the right and absorbs values a rounding error
    above ln 8.
    """
    preds, truth = _paired(preds, truth)
    ent = np.asarray(entropies, dtype=np.float64)
    if ent.shape != preds.shape:
        raise InvalidInputError("entropies must match the prediction length")
    if not bin_width > 0:
        raise InvalidInputError(f"bin_width must be positive, got {bin_width}")
    n_bins = max(1, math.ceil(MAX_ENTROPY / bin_width))
    edges = [k * bin_width for k in range(n_bins)] + [MAX_ENTROPY]
    idx = np.clip(np.floor(ent / bin_width).astype(np.int64), 0, n_bins - 1)
    n = np.bincount(idx, minlength=n_bins)
    ok = np.bincount(idx, weights=(preds == truth).astype(np.float64), minlength=n_bins)
    bins = tuple(
        EntropyBin(float(edges[k]), float(edges[k + 1]), int(n[k]), int(ok[k])) for k in range(n_bins)
    )
    return EntropyAccuracyCurve(bins)


@dataclass(frozen=True)
class EvaluationReport:
    confusion: ConfusionMatrix
    accuracy: float
    macro_f1: float
    per_class_f1: np.ndarray
    curve: EntropyAccuracyCurve | None

    def to_dict(self):
        return {
            "n_items": self.confusion.total,
            "accuracy": self.accuracy,
            "macro_f1": self.macro_f1,
            "per_class_f1": dict(zip(EMOTIONS, self.per_class_f1.tolist())),
            "confusion": self.confusion.to_dict(),
            "entropy_accuracy_curve": None if self.curve is None else self.curve.to_dict(),
        }


def evaluate(preds, truth, entropies=None, bin_width=DEFAULT_BIN_WIDTH):
    cm = confusion_matrix(preds, truth)
    macro, per_class = macro_f1(preds, truth)
    acc = int(np.trace(cm.counts)) / cm.total
    curve = None if entropies is None else entropy_accuracy_curve(preds, truth, entropies, bin_width)
    return EvaluationReport(cm, acc, macro, per_class, curve)


def format_matrix(cm, row_title="true", col_title="pred"):
    """Human-readable row-normalized matrix, 4 significant digits."""
    rn = cm.row_normalized
    width = max(len(e) for e in EMOTIONS) + 1
    head = f"{row_title + '/' + col_title:<{width}}" + "".join(f"{e[:8]:>10}" for e in EMOTIONS)
    lines = [head]
    for i, name in enumerate(EMOTIONS):
        cells = "".join(f"{rn[i, j]:>10.4g}" for j in range(N_CLASSES))
        flag = "  (empty)" if cm.empty_rows[i] else ""
        lines.append(f"{name:<{width}}{cells}{flag}")
    return "\n".join(lines)
