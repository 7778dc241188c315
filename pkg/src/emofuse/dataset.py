"""Manifest-level dataset preparation: balanced subsetting, exact
de-duplication and a stratified train/test split.

Randomness comes from :class:`SeededShuffler`, a Fisher-Yates shuffle driven
by the raw 64-bit output of PCG64 seeded through numpy's SeedSequence. Only
the bit generator is relied on, not numpy's higher-level sampling routines,
so the same seed gives the same permutation on any platform.
"""
from __future__ import annotations

import math
from collections import defaultdict
from typing import NamedTuple

import numpy as np

from .errors import InvalidInputError
from .labels import N_CLASSES


class ManifestRecord(NamedTuple):
    id: str
    label: int
    landmark_ref: str


def manifest_from_labels(labels):
    """Build a manifest from an id -> label mapping; landmark rows share the id."""
    return [ManifestRecord(rid, int(y), rid) for rid, y in labels.items()]


def _check_unique(manifest):
    ids = [r.id for r in manifest]
    if len(set(ids)) != len(ids):
        raise InvalidInputError("manifest ids must be unique")


class SeededShuffler:
    def __init__(self, seed):
        self._bits = np.random.PCG64(int(seed) % 2**64)

    def below(self, n):
        """Uniform integer in [0, n) by rejection on 64-bit draws."""
        if n <= 0:
            raise ValueError("n must be positive")
        limit = (2**64 // n) * n
        while True:
            r = int(self._bits.random_raw())
            if r < limit:
                return r % n

    def shuffle(self, items):
        out = list(items)
        for i in range(len(out) - 1, 0, -1):
            j = self.below(i + 1)
            out[i], out[j] = out[j], out[i]
        return out


def _by_class(manifest):
    groups = defaultdict(list)
    for rec in sorted(manifest, key=lambda r: r.id):
        groups[rec.label].append(rec)
    return groups


def balanced_subset(manifest, seed):
    """Keep min-class-count records per class, chosen uniformly; output sorted by id."""
    _check_unique(manifest)
    groups = _by_class(manifest)
    missing = [k for k in range(N_CLASSES) if not groups.get(k)]
    if missing:
        raise InvalidInputError(f"classes {missing} have no records")
    m = min(len(groups[k]) for k in range(N_CLASSES))
    rng = SeededShuffler(seed)
    chosen = []
    for k in range(N_CLASSES):
        chosen.extend(rng.shuffle(groups[k])[:m])
    return sorted(chosen, key=lambda r: r.id)


def dedup(manifest, landmarks):
    """Drop records whose 136 coordinates are bit-identical to an earlier record's (id order)."""
    _check_unique(manifest)
    seen = set()
    kept = []
    for rec in sorted(manifest, key=lambda r: r.id):
        try:
            lm = landmarks[rec.landmark_ref]
        except KeyError:
            raise InvalidInputError(f"no landmarks for record {rec.id!r}") from None
        key = np.ascontiguousarray(lm.points, dtype=np.float64).tobytes()
        if key in seen:
            continue
        seen.add(key)
        kept.append(rec)
    return kept


def n_train_for(n, ratio):
    # round away representation error such as 0.7 * 10 = 7.000000000000001
    return min(n, math.ceil(round(ratio * n, 9)))


def split_train_test(manifest, ratio=0.8, seed=0):
    """Stratified split: per class, shuffle then send the first ceil(ratio*n) to train."""
    if not 0.0 < ratio < 1.0:
        raise InvalidInputError(f"split ratio must lie in (0, 1), got {ratio}")
    _check_unique(manifest)
    groups = _by_class(manifest)
    rng = SeededShuffler(seed)
    train, test = [], []
    for k in range(N_CLASSES):
        recs = rng.shuffle(groups.get(k, []))
        cut = n_train_for(len(recs), ratio)
        train.extend(recs[:cut])
        test.extend(recs[cut:])
    return sorted(train, key=lambda r: r.id), sorted(test, key=lambda r: r.id)
