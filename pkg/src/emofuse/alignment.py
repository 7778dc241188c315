"""Canonical pose for 68-point facial landmarks.

A raw landmark set is resized onto a 200x200 canvas, translated so the nose
tip sits at the canvas centre, rotated so the nose bridge lies straight above
the tip, and finally scaled per axis so the nose length and the width of the
left eye take fixed values.

Coordinates follow image conventions: x grows to the right, y grows downward.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateGeometryError, InvalidInputError

N_LANDMARKS = 68
CANVAS = 200.0
CENTER = (100.0, 100.0)

NOSE_BRIDGE = 27
NOSE_TIP = 33
LEFT_EYE_OUTER = 36
LEFT_EYE_INNER = 39

NOSE_TARGET = 50.0
EYE_TARGET = 30.0

# tolerance on residual roll before per-axis scaling is allowed
ROLL_TOL = 1e-6


@dataclass(frozen=True)
class LandmarkSet:
    points: np.ndarray
    src_width: float = CANVAS
    src_height: float = CANVAS

    def __post_init__(self):
        pts = np.array(self.points, dtype=np.float64)
        if pts.shape != (N_LANDMARKS, 2):
            raise InvalidInputError(f"expected {N_LANDMARKS}x2 landmark array, got shape {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise InvalidInputError("landmark coordinates must be finite")
        if not (self.src_width > 0 and self.src_height > 0):
            raise InvalidInputError(
                f"source dimensions must be positive, got {self.src_width}x{self.src_height}"
            )
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    def with_points(self, points):
        return LandmarkSet(points, self.src_width, self.src_height)


@dataclass(frozen=True)
class AlignedLandmarks:
    """Landmarks on the 200x200 canvas in canonical pose."""

    points: np.ndarray
    roll_applied: float
    scale_x: float
    scale_y: float

    def as_landmark_set(self):
        return LandmarkSet(self.points, CANVAS, CANVAS)


def resize_to_canvas(lm):
    sx = CANVAS / lm.src_width
    sy = CANVAS / lm.src_height
    return LandmarkSet(lm.points * np.array([sx, sy]), CANVAS, CANVAS)


def center_on_nose(lm):
    shift = np.array(CENTER) - lm.points[NOSE_TIP]
    pts = lm.points + shift
    # the translation can leave rounding error on the pivot itself
    pts[NOSE_TIP] = CENTER
    return lm.with_points(pts)


def roll_angle(lm):
    """Signed angle in radians between the tip->bridge line and straight up.

    Zero when the bridge is directly above the tip; positive when the bridge
    leans to the right (+x).
    """
    dx, dy = lm.points[NOSE_BRIDGE] - lm.points[NOSE_TIP]
    if dx == 0.0 and dy == 0.0:
        raise DegenerateGeometryError("nose bridge and nose tip coincide")
    return math.atan2(dx, -dy)


def rotate(lm, theta, pivot=CENTER):
    if not math.isfinite(theta):
        raise InvalidInputError(f"rotation angle must be finite, got {theta}")
    if theta == 0.0:
        return lm.with_points(lm.points)
    c, s = math.cos(theta), math.sin(theta)
    rot = np.array([[c, -s], [s, c]])
    piv = np.asarray(pivot, dtype=np.float64)
    pts = (lm.points - piv) @ rot.T + piv
    return lm.with_points(pts)


def scale_normalize(lm, nose_target=NOSE_TARGET, eye_target=EYE_TARGET):
    """Scale y so the nose has length nose_target and x so the left eye is eye_target wide.

    The face must already be centred and upright.
    """
    theta = roll_angle(lm)
    if abs(theta) > ROLL_TOL:
        raise InvalidInputError(f"face is not upright (roll {theta:.3g} rad); rotate first")
    pts = lm.points
    nose = abs(pts[NOSE_BRIDGE, 1] - pts[NOSE_TIP, 1])
    eye = abs(pts[LEFT_EYE_INNER, 0] - pts[LEFT_EYE_OUTER, 0])
    if nose == 0.0:
        raise DegenerateGeometryError("nose length is zero")
    if eye == 0.0:
        raise DegenerateGeometryError("left eye corners share an x coordinate")
    scale_x = eye_target / eye
    scale_y = nose_target / nose
    center = np.array(CENTER)
    out = (pts - center) * np.array([scale_x, scale_y]) + center

    out[NOSE_TIP] = center
    out.setflags(write=False)
    return AlignedLandmarks(out, 0.0, scale_x, scale_y)


def align(lm, nose_target=NOSE_TARGET, eye_target=EYE_TARGET):
    """Resize, centre, de-roll and scale-normalise a landmark set."""
    canvas = center_on_nose(resize_to_canvas(lm))
    theta = roll_angle(canvas)
    upright = rotate(canvas, -theta, CENTER)
    # rotation leaves ~1e-15 of x offset on the bridge; snap it so the
    # upright check and the vertical-nose invariant are exact
    pts = np.array(upright.points)
    pts[NOSE_BRIDGE, 0] = CENTER[0]
    pts[NOSE_TIP] = CENTER
    upright = upright.with_points(pts)
    scaled = scale_normalize(upright, nose_target, eye_target)
    return AlignedLandmarks(scaled.points, theta, scaled.scale_x, scaled.scale_y)
