"""Multiclass gradient-boosted regression trees with a softmax objective.

Every boosting round fits one regression tree per class to the first and
second derivatives of the multiclass log loss (Newton boosting). Splits are
found by exact greedy search over every threshold between consecutive
distinct feature values, scored by

    gain = 1/2 * [G_L^2/(H_L+lambda) + G_R^2/(H_R+lambda) - G^2/(H+lambda)]

and leaves take the Newton weight -G/(H+lambda). Rows with x < threshold go
left.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import InvalidInputError
from .features import FeatureStats, N_DISTANCES, N_FEATURES
from .labels import N_CLASSES, check_labels

FORMAT_VERSION = 1
LEAF = -1


@dataclass(frozen=True)
class TrainConfig:
    rounds: int = 200
    max_depth: int = 6
    learning_rate: float = 0.1
    reg_lambda: float = 1.0
    min_child_weight: float = 1.0
    seed: int = 42

    def __post_init__(self):
        if int(self.rounds) != self.rounds or self.rounds < 0:
            raise InvalidInputError(f"rounds must be a non-negative integer, got {self.rounds}")
        if int(self.max_depth) != self.max_depth or self.max_depth < 1:
            raise InvalidInputError(f"max_depth must be a positive integer, got {self.max_depth}")
        if not 0.0 < self.learning_rate <= 1.0:
            raise InvalidInputError(f"learning_rate must lie in (0, 1], got {self.learning_rate}")
        if self.reg_lambda < 0:
            raise InvalidInputError(f"lambda must be >= 0, got {self.reg_lambda}")
        if self.min_child_weight < 0:
            raise InvalidInputError(f"min_child_weight must be >= 0, got {self.min_child_weight}")
        if not -(2**63) <= int(self.seed) < 2**64:
            raise InvalidInputError("seed must fit in 64 bits")

    def to_dict(self):
        d = asdict(self)
        d["lambda"] = d.pop("reg_lambda")
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        if "lambda" in d:
            d["reg_lambda"] = d.pop("lambda")
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise InvalidInputError(f"unknown training options: {sorted(unknown)}")
        return cls(**d)


def softmax(scores):
    s = np.asarray(scores, dtype=np.float64)
    if not np.all(np.isfinite(s)):
        raise InvalidInputError("softmax scores must be finite")
    e = np.exp(s - s.max(axis=-1, keepdims=True))
    return e / e.sum(axis=-1, keepdims=True)


def grad_hess(p, y):
    """Gradient and diagonal Hessian of -log p_y with respect to the class scores."""
    p = np.asarray(p, dtype=np.float64)
    onehot = np.zeros_like(p)
    if p.ndim == 1:
        onehot[int(y)] = 1.0
    else:
        onehot[np.arange(p.shape[0]), np.asarray(y)] = 1.0
    return p - onehot, p * (1.0 - p)


def log_loss(p, y):
    p = np.asarray(p, dtype=np.float64)
    py = p[np.arange(p.shape[0]), y]
    return float(-np.mean(np.log(np.maximum(py, np.finfo(float).tiny))))


@dataclass
class Tree:
    """Flat binary regression tree. Node 0 is the root; leaves have feature == -1."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    gain: np.ndarray
    cover: np.ndarray

    @classmethod
    def leaf(cls, weight, cover=0.0):
        return cls(
            np.array([LEAF]), np.array([0.0]), np.array([LEAF]), np.array([LEAF]),
            np.array([float(weight)]), np.array([0.0]), np.array([float(cover)]),
        )

    @property
    def n_nodes(self):
        return len(self.feature)

    @property
    def depth(self):
        depth = np.zeros(self.n_nodes, dtype=np.int64)
        for i in range(self.n_nodes):
            if self.feature[i] != LEAF:
                depth[self.left[i]] = depth[self.right[i]] = depth[i] + 1
        return int(depth.max())

    def predict(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        n = X.shape[0]
        rows = np.arange(n)
        idx = np.zeros(n, dtype=np.int64)
        while True:
            f = self.feature[idx]
            internal = f != LEAF
            if not internal.any():
                break
            x = X[rows, np.where(internal, f, 0)]
            nxt = np.where(x < self.threshold[idx], self.left[idx], self.right[idx])
            idx = np.where(internal, nxt, idx)
        return self.value[idx]

    def to_dict(self):
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": self.value.tolist(),
            "gain": self.gain.tolist(),
            "cover": self.cover.tolist(),
        }

    @classmethod
    def from_dict(cls, d):
        tree = cls(
            np.asarray(d["feature"], dtype=np.int64),
            np.asarray(d["threshold"], dtype=np.float64),
            np.asarray(d["left"], dtype=np.int64),
            np.asarray(d["right"], dtype=np.int64),
            np.asarray(d["value"], dtype=np.float64),
            np.asarray(d["gain"], dtype=np.float64),
            np.asarray(d["cover"], dtype=np.float64),
        )
        n = tree.n_nodes
        if n == 0 or any(len(a) != n for a in (tree.threshold, tree.left, tree.right, tree.value, tree.gain, tree.cover)):
            raise InvalidInputError("tree node arrays must be non-empty and of equal length")
        # every node reachable from the root exactly once
        seen = np.zeros(n, dtype=bool)
        stack = [0]
        while stack:
            i = stack.pop()
            if seen[i]:
                raise InvalidInputError("tree nodes are shared or cyclic")
            seen[i] = True
            if tree.feature[i] != LEAF:
                kids = (int(tree.left[i]), int(tree.right[i]))
                if not all(0 < k < n for k in kids):
                    raise InvalidInputError(f"node {i} has a child index out of range")
                stack.extend(kids)
        if not seen.all():
            raise InvalidInputError("tree has unreachable nodes")
        return tree


def presort(X):
    """Per-feature stable argsort, shape (n_features, n_rows)."""
    return np.argsort(X, axis=0, kind="stable").T.copy()


def _leaf_weight(G, H, lam):
    denom = H + lam
    return -G / denom if denom > 0 else 0.0


def fit_tree(X, g, h, cfg, sorted_idx=None):
    """Grow one regression tree on gradients g and hessians h by exact greedy search.

    Ties between equal-gain splits go to the lowest feature index and then
    the lowest threshold.
    """
    X = np.asarray(X, dtype=np.float64)
    g = np.asarray(g, dtype=np.float64)
    h = np.asarray(h, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise InvalidInputError("fit_tree needs a non-empty 2-D feature matrix")
    if not (X.shape[0] == g.shape[0] == h.shape[0]):
        raise InvalidInputError("X, g and h must have the same number of rows")
    if sorted_idx is None:
        sorted_idx = presort(X)
    lam = float(cfg.reg_lambda)
    mcw = float(cfg.min_child_weight)
    n_feat = X.shape[1]
    col = np.arange(n_feat)[:, None]

    feature, threshold, left, right, value, gain, cover = ([] for _ in range(7))

    def new_node():
        for arr, init in ((feature, LEAF), (threshold, 0.0), (left, LEAF), (right, LEAF),
                          (value, 0.0), (gain, 0.0), (cover, 0.0)):
            arr.append(init)
        return len(feature) - 1

    def grow(S, depth):
        nid = new_node()
        rows = S[0]
        G = g[rows].sum()
        H = h[rows].sum()
        value[nid] = _leaf_weight(G, H, lam)
        cover[nid] = H
        n = S.shape[1]
        if depth >= cfg.max_depth or n < 2:
            return nid

        xs = X[S, col]
        GL = np.cumsum(g[S], axis=1)[:, :-1]
        HL = np.cumsum(h[S], axis=1)[:, :-1]
        GR = G - GL
        HR = H - HL
        valid = (xs[:, 1:] > xs[:, :-1]) & (HL >= mcw) & (HR >= mcw) & (HL + lam > 0) & (HR + lam > 0)
        if not valid.any():
            return nid
        parent = G * G / (H + lam) if H + lam > 0 else 0.0
        with np.errstate(divide="ignore", invalid="ignore"):
            scores = 0.5 * (GL * GL / (HL + lam) + GR * GR / (HR + lam) - parent)
        scores = np.where(valid, scores, -np.inf)
        best = int(np.argmax(scores))
        best_gain = scores.flat[best]
        if not best_gain > 0:
            return nid

        f, pos = divmod(best, n - 1)
        lo, hi = xs[f, pos], xs[f, pos + 1]
        thr = lo + (hi - lo) / 2
        if not lo < thr:
            thr = hi
        go_left = X[:, f] < thr
        mask = go_left[S]
        n_left = int(mask[0].sum())
        S_left = S[mask].reshape(n_feat, n_left)
        S_right = S[~mask].reshape(n_feat, n - n_left)

        feature[nid] = f
        threshold[nid] = float(thr)
        gain[nid] = float(best_gain)
        left[nid] = grow(S_left, depth + 1)
        right[nid] = grow(S_right, depth + 1)
        return nid

    grow(sorted_idx, 0)
    return Tree(
        np.array(feature, dtype=np.int64), np.array(threshold), np.array(left, dtype=np.int64),
        np.array(right, dtype=np.int64), np.array(value), np.array(gain), np.array(cover),
    )


@dataclass
class GbtModel:
    trees: list  # rounds x n_classes Tree objects
    config: TrainConfig
    n_features: int
    base_score: float = 0.0
    stats: FeatureStats | None = None
    angle_table_hash: str | None = None
    alignment: dict | None = None
    train_log_loss: list = field(default_factory=list)
    provenance: dict | None = None

    def __post_init__(self):
        for r, row in enumerate(self.trees):
            if len(row) != N_CLASSES:
                raise InvalidInputError(f"round {r} has {len(row)} trees, expected {N_CLASSES}")
        if self.stats is not None and self.stats.mean.shape[0] != self.n_features:
            raise InvalidInputError("feature stats length does not match n_features")

    @property
    def learning_rate(self):
        return self.config.learning_rate

    @property
    def n_rounds(self):
        return len(self.trees)

    def decision_scores(self, X):
        X = _check_features(X, self.n_features)
        scores = np.full((X.shape[0], N_CLASSES), self.base_score, dtype=np.float64)
        for row in self.trees:
            for k, tree in enumerate(row):
                scores[:, k] += self.learning_rate * tree.predict(X)
        return scores

    def to_dict(self):
        return {
            "format": "emofuse-gbt",
            "format_version": FORMAT_VERSION,
            "n_classes": N_CLASSES,
            "n_features": int(self.n_features),
            "base_score": float(self.base_score),
            "config": self.config.to_dict(),
            "stats": None if self.stats is None else self.stats.to_dict(),
            "angle_table_hash": self.angle_table_hash,
            "alignment": self.alignment,
            "train_log_loss": [float(v) for v in self.train_log_loss],
            "provenance": self.provenance,
            "trees": [[t.to_dict() for t in row] for row in self.trees],
        }

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"), allow_nan=False) + "\n"

    @classmethod
    def from_dict(cls, d):
        if d.get("format") != "emofuse-gbt":
            raise InvalidInputError("not an emofuse model document")
        if d.get("format_version") != FORMAT_VERSION:
            raise InvalidInputError(f"unsupported model format version {d.get('format_version')}")
        if d.get("n_classes") != N_CLASSES:
            raise InvalidInputError(f"model has {d.get('n_classes')} classes, expected {N_CLASSES}")
        stats = None if d.get("stats") is None else FeatureStats.from_dict(d["stats"])
        return cls(
            trees=[[Tree.from_dict(t) for t in row] for row in d["trees"]],
            config=TrainConfig.from_dict(d["config"]),
            n_features=int(d["n_features"]),
            base_score=float(d["base_score"]),
            stats=stats,
            angle_table_hash=d.get("angle_table_hash"),
            alignment=d.get("alignment"),
            train_log_loss=list(d.get("train_log_loss", [])),
            provenance=d.get("provenance"),
        )

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def _check_features(X, n_features):
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2 or X.shape[1] != n_features:
        raise InvalidInputError(f"expected {n_features} features per row, got shape {X.shape}")
    return X


def train(X, labels, cfg=None, stats=None, angle_table_hash=None, alignment=None):
    """Fit a boosted ensemble on already-standardized features X."""
    cfg = TrainConfig() if cfg is None else cfg
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise InvalidInputError("training needs a non-empty 2-D feature matrix")
    y = check_labels(labels)
    if y.shape[0] != X.shape[0]:
        raise InvalidInputError(f"{X.shape[0]} feature rows but {y.shape[0]} labels")
    if not np.all(np.isfinite(X)):
        raise InvalidInputError("training features must be finite")

    sorted_idx = presort(X)
    scores = np.zeros((X.shape[0], N_CLASSES))
    history = [log_loss(softmax(scores), y)]
    trees = []
    for _ in range(cfg.rounds):
        p = softmax(scores)
        g, h = grad_hess(p, y)
        row = [fit_tree(X, g[:, k], h[:, k], cfg, sorted_idx) for k in range(N_CLASSES)]
        for k, tree in enumerate(row):
            scores[:, k] += cfg.learning_rate * tree.predict(X)
        trees.append(row)
        history.append(log_loss(softmax(scores), y))
    return GbtModel(trees, cfg, X.shape[1], 0.0, stats, angle_table_hash, alignment, history)


def predict_proba(model, features):
    """Class probabilities for one standardized feature vector or a matrix of them."""
    single = np.ndim(features) == 1
    p = softmax(model.decision_scores(features))
    return p[0] if single else p


@dataclass(frozen=True)
class ImportanceReport:
    gain: np.ndarray
    mean_gain: float
    important: np.ndarray
    n_important_distances: int
    n_important_angles: int

    def to_dict(self):
        return {
            "gain": self.gain.tolist(),
            "mean_gain": self.mean_gain,
            "important": self.important.tolist(),
            "n_important": int(len(self.important)),
            "n_important_distances": self.n_important_distances,
            "n_important_angles": self.n_important_angles,
        }


def feature_importance(model, n_distances=None):
    """Total split gain per feature; features above the mean gain are important.

    Indices below n_distances count as distances and the rest as angles. By
    default this is 2278 for 2307-feature models and all features otherwise.
    """
    total = np.zeros(model.n_features)
    for row in model.trees:
        for tree in row:
            internal = tree.feature != LEAF
            np.add.at(total, tree.feature[internal], tree.gain[internal])
    mean = float(total.mean()) if model.n_features else 0.0
    important = np.flatnonzero(total > mean)
    if n_distances is None:
        n_distances = N_DISTANCES if model.n_features == N_FEATURES else model.n_features
    n_dist = int(np.sum(important < n_distances))
    return ImportanceReport(total, mean, important, n_dist, int(len(important) - n_dist))
