"""Combining two classifiers' probability vectors into one forced choice.

All functions accept either a single 8-vector or an (n, 8) array of rows.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import entr

from .errors import InvalidInputError
from .gbt import softmax
from .labels import N_CLASSES

METHODS = ("sum_softmax", "plain_sum", "min_entropy")
MAX_ENTROPY = math.log(N_CLASSES)
PROB_TOL = 1e-9


@dataclass(frozen=True)
class FusedPrediction:
    q: np.ndarray
    choice: np.ndarray | int
    method: str


def check_probs(p, tol=PROB_TOL):
    p = np.asarray(p, dtype=np.float64)
    if p.shape[-1] != N_CLASSES:
        raise InvalidInputError(f"probability vectors need {N_CLASSES} entries, got shape {p.shape}")
    if not np.all(np.isfinite(p)) or np.any(p < 0) or np.any(p > 1):
        raise InvalidInputError("probabilities must be finite and lie in [0, 1]")
    if np.any(np.abs(p.sum(axis=-1) - 1.0) > tol):
        raise InvalidInputError("probability vectors must sum to 1")
    return p


def forced_choice(q):
    """Index of the largest probability; ties go to the lowest index."""
    choice = np.argmax(np.asarray(q), axis=-1)
    return int(choice) if np.ndim(choice) == 0 else choice


def entropy(p):
    """Shannon entropy in nats, with 0 * log 0 taken as 0."""
    return entr(np.asarray(p, dtype=np.float64)).sum(axis=-1)


def fuse_sum_softmax(p_a, p_b):
    """q = softmax(p_a + p_b)."""
    p_a, p_b = check_probs(p_a), check_probs(p_b)
    q = softmax(p_a + p_b)
    return FusedPrediction(q, forced_choice(q), "sum_softmax")


def fuse_plain_sum(p_a, p_b):
    """q = (p_a + p_b) / 2."""
    p_a, p_b = check_probs(p_a), check_probs(p_b)
    q = (p_a + p_b) / 2
    return FusedPrediction(q, forced_choice(q), "plain_sum")


def fuse_min_entropy(p_a, p_b):
    """Keep whichever input is more peaked; exact entropy ties keep p_a."""
    p_a, p_b = check_probs(p_a), check_probs(p_b)
    take_b = entropy(p_b) < entropy(p_a)
    q = np.where(np.asarray(take_b)[..., None], p_b, p_a)
    return FusedPrediction(q, forced_choice(q), "min_entropy")


_FUSERS = {
    "sum_softmax": fuse_sum_softmax,
    "plain_sum": fuse_plain_sum,
    "min_entropy": fuse_min_entropy,
}


def fuse(p_a, p_b, method="sum_softmax"):
    key = method.replace("-", "_")
    if key not in _FUSERS:
        raise InvalidInputError(f"unknown fusion method {method!r}; choose from {', '.join(METHODS)}")
    return _FUSERS[key](p_a, p_b)
