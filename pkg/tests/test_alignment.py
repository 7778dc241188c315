import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from emofuse.alignment import (
    CENTER,
    EYE_TARGET,
    NOSE_TARGET,
    AlignedLandmarks,
    LandmarkSet,
    align,
    center_on_nose,
    resize_to_canvas,
    roll_angle,
    rotate,
    scale_normalize,
)
from emofuse.errors import DegenerateGeometryError, InvalidInputError
from emofuse.synthetic import random_pose, synthetic_face


def blank(**pts):
    """200x200 landmark set with every point at (100, 100) except the given overrides."""
    arr = np.full((68, 2), 100.0)
    for key, xy in pts.items():
        arr[int(key[1:])] = xy
    return arr


def test_landmarkset_validates_shape_and_values():
    with pytest.raises(InvalidInputError):
        LandmarkSet(np.zeros((67, 2)))
    bad = np.zeros((68, 2))
    bad[3, 0] = np.nan
    with pytest.raises(InvalidInputError):
        LandmarkSet(bad)
    with pytest.raises(InvalidInputError):
        LandmarkSet(np.zeros((68, 2)), 0, 200)


class TestResize:
    def test_halving(self):
        out = resize_to_canvas(LandmarkSet(blank(p0=(100, 100)), 400, 400))
        np.testing.assert_array_equal(out.points[0], (50, 50))
        assert (out.src_width, out.src_height) == (200, 200)

    def test_identity_on_200_canvas(self):
        out = resize_to_canvas(LandmarkSet(blank(p0=(37, 81)), 200, 200))
        np.testing.assert_array_equal(out.points[0], (37, 81))

    def test_anisotropic(self):
        out = resize_to_canvas(LandmarkSet(blank(p0=(10, 20)), 100, 400))
        np.testing.assert_array_equal(out.points[0], (20, 10))


class TestCenter:
    def test_already_centered_is_unchanged(self, face):
        pts = np.array(face.points)
        pts += np.array(CENTER) - pts[33]
        lm = LandmarkSet(pts)
        np.testing.assert_array_equal(center_on_nose(lm).points, lm.points)

    def test_translation(self):
        out = center_on_nose(LandmarkSet(blank(p33=(90, 110), p0=(10, 10))))
        np.testing.assert_array_equal(out.points[0], (20, 0))
        np.testing.assert_array_equal(out.points[33], CENTER)

    def test_tip_lands_on_center(self, rng):
        lm = LandmarkSet(rng.uniform(0, 200, (68, 2)))
        np.testing.assert_array_equal(center_on_nose(lm).points[33], CENTER)


class TestRollAngle:
    @pytest.mark.parametrize(
        "bridge, expected",
        [((100, 50), 0.0), ((150, 50), math.pi / 4), ((50, 100), -math.pi / 2)],
    )
    def test_cases(self, bridge, expected):
        lm = LandmarkSet(blank(p33=(100, 100), p27=bridge))
        assert roll_angle(lm) == pytest.approx(expected, abs=1e-15)

    def test_coincident_bridge_and_tip(self):
        with pytest.raises(DegenerateGeometryError):
            roll_angle(LandmarkSet(blank()))

    def test_range(self, rng):
        for _ in range(200):
            lm = LandmarkSet(rng.uniform(0, 200, (68, 2)))
            assert -math.pi < roll_angle(lm) <= math.pi


class TestRotate:
    def test_zero_is_identity(self, face):
        np.testing.assert_array_equal(rotate(face, 0.0, CENTER).points, face.points)

    def test_quarter_turn(self):
        out = rotate(LandmarkSet(blank(p0=(150, 100))), math.pi / 2, (100, 100))
        np.testing.assert_allclose(out.points[0], (100, 150), atol=1e-12)

    def test_inverse(self, face):
        back = rotate(rotate(face, 0.7, CENTER), -0.7, CENTER)
        np.testing.assert_allclose(back.points, face.points, atol=1e-9)

    def test_rejects_non_finite(self, face):
        with pytest.raises(InvalidInputError):
            rotate(face, float("inf"), CENTER)

    @settings(max_examples=100, deadline=None)
    @given(
        seed=st.integers(0, 2**32 - 1),
        theta=st.floats(-10, 10, allow_nan=False),
        px=st.floats(-500, 500),
        py=st.floats(-500, 500),
    )
    def test_isometry(self, seed, theta, px, py):
        pts = np.random.default_rng(seed).uniform(-300, 300, (68, 2))
        out = rotate(LandmarkSet(pts), theta, (px, py)).points
        d_in = np.linalg.norm(pts[:, None] - pts[None], axis=-1)
        d_out = np.linalg.norm(out[:, None] - out[None], axis=-1)
        np.testing.assert_allclose(d_out, d_in, atol=1e-9, rtol=0)


def canonical_face(rng):
    """An upright, centred face already at the target nose length and eye width."""
    return align(LandmarkSet(synthetic_face(3, rng))).as_landmark_set()


class TestScaleNormalize:
    def test_fixed_point(self, rng):
        lm = canonical_face(rng)
        out = scale_normalize(lm)
        np.testing.assert_allclose(out.points, lm.points, atol=1e-9)
        assert out.scale_x == pytest.approx(1.0, abs=1e-12)
        assert out.scale_y == pytest.approx(1.0, abs=1e-12)

    def test_nose_length_100_halves_y(self):
        pts = blank(p27=(100, 0), p36=(70, 90), p39=(100, 90))
        out = scale_normalize(LandmarkSet(pts))
        assert out.scale_y == 0.5
        assert out.scale_x == 1.0

    def test_targets_hold(self, face):
        lm = center_on_nose(face)
        lm = rotate(lm, -roll_angle(lm), CENTER)
        pts = np.array(lm.points)
        pts[27, 0] = 100.0
        out = scale_normalize(LandmarkSet(pts))
        p = out.points
        assert math.dist(p[27], p[33]) == pytest.approx(NOSE_TARGET, abs=1e-9)
        assert abs(p[39, 0] - p[36, 0]) == pytest.approx(EYE_TARGET, abs=1e-9)

    def test_rejects_tilted_face(self):
        with pytest.raises(InvalidInputError):
            scale_normalize(LandmarkSet(blank(p27=(120, 50), p36=(70, 90), p39=(90, 90))))

    def test_degenerate_eye(self):
        with pytest.raises(DegenerateGeometryError):
            scale_normalize(LandmarkSet(blank(p27=(100, 50), p36=(80, 90), p39=(80, 95))))


def assert_aligned_invariants(al: AlignedLandmarks):
    p = al.points
    np.testing.assert_allclose(p[33], CENTER, atol=1e-9, rtol=0)
    assert abs(p[27, 0] - p[33, 0]) <= 1e-9
    assert p[27, 1] < p[33, 1]
    assert math.dist(p[27], p[33]) == pytest.approx(NOSE_TARGET, abs=1e-9)
    assert abs(p[39, 0] - p[36, 0]) == pytest.approx(EYE_TARGET, abs=1e-9)


class TestAlign:
    def test_fixed_point(self, rng):
        lm = canonical_face(rng)
        np.testing.assert_allclose(align(lm).points, lm.points, atol=1e-6)

    def test_prerotated_face(self, rng):
        lm = canonical_face(rng)
        turned = rotate(lm, 0.3, CENTER)
        np.testing.assert_allclose(align(turned).points, lm.points, atol=1e-6)
        assert align(turned).roll_applied == pytest.approx(0.3, abs=1e-12)

    def test_translated_scaled_on_400_source(self, rng):
        lm = canonical_face(rng)
        moved = (lm.points + np.array([17.0, -5.0])) * 2.0
        out = align(LandmarkSet(moved, 400, 400))
        np.testing.assert_allclose(out.points, lm.points, atol=1e-6)

    def test_invariants_and_zero_roll(self, rng):
        for _ in range(50):
            out = align(random_pose(synthetic_face(int(rng.integers(8)), rng), rng))
            assert_aligned_invariants(out)
            assert abs(roll_angle(out.as_landmark_set())) <= 1e-9

    def test_idempotent(self, rng):
        out = align(random_pose(synthetic_face(5, rng), rng))
        again = align(out.as_landmark_set())
        np.testing.assert_allclose(again.points, out.points, atol=1e-6)

    def test_deterministic(self, rng):
        lm = random_pose(synthetic_face(2, rng), rng)
        assert align(lm).points.tobytes() == align(lm).points.tobytes()

    def test_degenerate_propagates(self):
        with pytest.raises(DegenerateGeometryError):
            align(LandmarkSet(blank()))
