"""The eight emotion categories in canonical order."""

import numpy as np

from .errors import InvalidInputError

EMOTIONS = ("neutral", "happy", "sad", "surprise", "fear", "disgust", "anger", "contempt")
N_CLASSES = len(EMOTIONS)

_INDEX = {name: i for i, name in enumerate(EMOTIONS)}


def label_index(name):
    try:
        return _INDEX[name]
    except KeyError:
        raise InvalidInputError(f"unknown emotion label {name!r}") from None


def label_name(index):
    if not 0 <= int(index) < N_CLASSES:
        raise InvalidInputError(f"emotion index {index} outside 0..{N_CLASSES - 1}")
    return EMOTIONS[int(index)]


def check_labels(labels):
    """Return labels as an int array, raising if any falls outside 0..7."""
    y = np.asarray(labels)
    if y.ndim != 1:
        raise InvalidInputError("labels must be one-dimensional")
    if y.size and (not np.issubdtype(y.dtype, np.integer)):
        if not np.all(np.equal(np.mod(y, 1), 0)):
            raise InvalidInputError("labels must be integers")
    y = y.astype(np.int64)
    bad = (y < 0) | (y >= N_CLASSES)
    if np.any(bad):
        raise InvalidInputError(f"invalid label {y[bad][0]} at position {int(np.flatnonzero(bad)[0])}")
    return y
