"""Reading and writing the comma-separated data files and JSON documents.

All text files are UTF-8 with LF line endings. Lines starting with ``#`` are
comments; writers use one such line to record provenance. Floats are written
in Python's shortest round-trip form so a write/read cycle is exact.
"""
from __future__ import annotations

import csv
import hashlib
import json
import math
from pathlib import Path

import numpy as np

from .alignment import N_LANDMARKS, LandmarkSet
from .errors import EmofuseError, ParseError
from .labels import EMOTIONS, N_CLASSES

LANDMARK_HEADER = ["id", "width", "height"] + [f"{ax}{i}" for i in range(N_LANDMARKS) for ax in "xy"]
PROB_HEADER = ["id", *EMOTIONS]
LABEL_HEADER = ["id", "label"]
PROB_SUM_TOL = 1e-6


def file_digest(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _fmt(x):
    return repr(float(x))


def _read_rows(path):
    """Yield (line_number, cells) for non-comment, non-blank lines."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ParseError("file not found", path) from None
    except UnicodeDecodeError:
        raise ParseError("file is not valid UTF-8", path) from None
    rows = []
    for lineno, line in enumerate(text.split("\n"), start=1):
        line = line.rstrip("\r")
        if not line.strip() or line.startswith("#"):
            continue
        rows.append((lineno, next(csv.reader([line]))))
    if not rows:
        raise ParseError("file has no header", path)
    return rows


def _float(cell, path, lineno):
    try:
        v = float(cell)
    except ValueError:
        raise ParseError(f"non-numeric cell {cell!r}", path, lineno) from None
    if not math.isfinite(v):
        raise ParseError(f"non-finite value {cell!r}", path, lineno)
    return v


def _check_header(rows, expected, path, extra_ok=()):
    lineno, header = rows[0]
    header = [c.strip() for c in header]
    if header[: len(expected)] != expected or any(c not in extra_ok for c in header[len(expected):]):
        raise ParseError(f"header must be {','.join(expected[:4])}{',...' if len(expected) > 4 else ''}", path, lineno)
    return header


def _unique_id(cell, seen, path, lineno):
    rid = cell.strip()
    if not rid:
        raise ParseError("empty id", path, lineno)
    if rid in seen:
        raise ParseError(f"duplicate id {rid!r}", path, lineno)
    seen.add(rid)
    return rid


def _write_lines(path, header, rows, provenance=None):
    lines = []
    if provenance is not None:
        lines.append("# provenance: " + json.dumps(provenance, sort_keys=True, separators=(",", ":")))
    lines.append(",".join(header))
    lines.extend(",".join(r) for r in rows)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def read_provenance(path):
    for line in Path(path).read_text(encoding="utf-8").split("\n"):
        if line.startswith("# provenance: "):
            return json.loads(line[len("# provenance: "):])
    return None


# -- landmarks -------------------------------------------------------------

def load_landmarks(path):
    """Landmark sets keyed by id, in file order."""
    rows = _read_rows(path)
    _check_header(rows, LANDMARK_HEADER, path)
    out, seen = {}, set()
    for lineno, cells in rows[1:]:
        if len(cells) != len(LANDMARK_HEADER):
            raise ParseError(f"expected {len(LANDMARK_HEADER)} columns, got {len(cells)}", path, lineno)
        rid = _unique_id(cells[0], seen, path, lineno)
        vals = [_float(c, path, lineno) for c in cells[1:]]
        try:
            out[rid] = LandmarkSet(np.array(vals[2:]).reshape(N_LANDMARKS, 2), vals[0], vals[1])
        except EmofuseError as exc:
            raise ParseError(str(exc), path, lineno) from None
    return out


def write_landmarks(path, records, provenance=None):
    rows = []
    for rid, lm in records.items():
        cells = [rid, _fmt(lm.src_width), _fmt(lm.src_height)]
        cells.extend(_fmt(v) for v in np.asarray(lm.points).ravel())
        rows.append(cells)
    _write_lines(path, LANDMARK_HEADER, rows, provenance)


# -- probabilities -----------------------------------------------------------

def load_probabilities(path):
    """Return (ids, probs) with probs an (n, 8) array in canonical class order.

    Rows whose sum is within 1e-6 of 1 are renormalized; anything else, or a
    negative entry, is rejected. A trailing ``choice`` column is tolerated.
    """
    rows = _read_rows(path)
    header = _check_header(rows, PROB_HEADER, path, extra_ok=("choice",))
    ids, probs, seen = [], [], set()
    for lineno, cells in rows[1:]:
        if len(cells) != len(header):
            raise ParseError(f"expected {len(header)} columns, got {len(cells)}", path, lineno)
        ids.append(_unique_id(cells[0], seen, path, lineno))
        p = np.array([_float(c, path, lineno) for c in cells[1 : 1 + N_CLASSES]])
        if np.any(p < 0):
            raise ParseError("negative probability", path, lineno)
        s = p.sum()
        if abs(s - 1.0) > PROB_SUM_TOL:
            raise ParseError(f"probabilities sum to {s!r}, not 1", path, lineno)
        probs.append(p / s)
    return ids, np.array(probs).reshape(-1, N_CLASSES)


def write_probabilities(path, ids, probs, choice=None, provenance=None):
    header = list(PROB_HEADER) + (["choice"] if choice is not None else [])
    rows = []
    for k, rid in enumerate(ids):
        cells = [rid] + [_fmt(v) for v in probs[k]]
        if choice is not None:
            cells.append(EMOTIONS[int(choice[k])])
        rows.append(cells)
    _write_lines(path, header, rows, provenance)


# -- labels -------------------------------------------------------------------

def load_labels(path):
    """Labels keyed by id as canonical indices, in file order."""
    rows = _read_rows(path)
    _check_header(rows, LABEL_HEADER, path)
    index = {name: i for i, name in enumerate(EMOTIONS)}
    out, seen = {}, set()
    for lineno, cells in rows[1:]:
        if len(cells) != 2:
            raise ParseError(f"expected 2 columns, got {len(cells)}", path, lineno)
        rid = _unique_id(cells[0], seen, path, lineno)
        name = cells[1].strip()
        if name not in index:
            raise ParseError(f"unknown emotion label {name!r}", path, lineno)
        out[rid] = index[name]
    return out


def write_labels(path, labels, provenance=None):
    _write_lines(path, LABEL_HEADER, [[rid, EMOTIONS[y]] for rid, y in labels.items()], provenance)


# -- features -----------------------------------------------------------------

def write_features(path, ids, X, names, provenance=None):
    rows = [[rid] + [_fmt(v) for v in X[k]] for k, rid in enumerate(ids)]
    _write_lines(path, ["id", *names], rows, provenance)


def load_features(path):
    rows = _read_rows(path)
    _, header = rows[0]
    if not header or header[0].strip() != "id":
        raise ParseError("first column must be id", path, rows[0][0])
    ids, data, seen = [], [], set()
    for lineno, cells in rows[1:]:
        if len(cells) != len(header):
            raise ParseError(f"expected {len(header)} columns, got {len(cells)}", path, lineno)
        ids.append(_unique_id(cells[0], seen, path, lineno))
        data.append([_float(c, path, lineno) for c in cells[1:]])
    return ids, np.array(data).reshape(len(ids), len(header) - 1), [c.strip() for c in header[1:]]


# -- JSON -------------------------------------------------------------------

def dumps_json(obj):
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_json(path, obj):
    Path(path).write_text(dumps_json(obj), encoding="utf-8", newline="\n")


def read_json(path):
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ParseError("file not found", path) from None
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", path, exc.lineno) from None
