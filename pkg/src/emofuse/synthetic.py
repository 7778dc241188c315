"""Synthetic data for tests and demos.

Nothing here is needed to run the pipeline on real data. It provides:

* a procedural 68-point face with a per-emotion deformation, so the
  align -> featurize -> train path can be exercised end to end;
* two noisy probability-emitting "branches" whose errors are mostly
  independent, for studying fusion;
* a fixed 4520-item agreement fixture with a prescribed agree/disagree
  structure.
"""
from __future__ import annotations

import math

import numpy as np

from .alignment import N_LANDMARKS, LandmarkSet
from .labels import N_CLASSES


def template_face():
    """Upright neutral face on a 200x200 canvas, standard 68-point indexing."""
    pts = np.zeros((N_LANDMARKS, 2))
    k = np.arange(17)
    pts[0:17, 0] = 100 - 62 * np.cos(np.pi * k / 16)
    pts[0:17, 1] = 75 + 95 * np.sin(np.pi * k / 16)
    j = np.arange(5)
    pts[17:22] = np.column_stack([50 + 10 * j, 60 - 8 * np.sin(np.pi * j / 4)])
    pts[22:27] = np.column_stack([110 + 10 * j, 60 - 8 * np.sin(np.pi * j / 4)])
    pts[27:31] = [(100, 65), (100, 75), (100, 85), (100, 95)]
    pts[31:36] = [(88, 108), (94, 110), (100, 112), (106, 110), (112, 108)]
    pts[36:42] = [(58, 70), (64, 66), (76, 66), (82, 70), (76, 74), (64, 74)]
    pts[42:48] = [(118, 70), (124, 66), (136, 66), (142, 70), (136, 74), (124, 74)]
    pts[48:60] = [(78, 140), (85, 134), (93, 131), (100, 133), (107, 131), (115, 134),
                  (122, 140), (115, 147), (107, 150), (100, 151), (93, 150), (85, 147)]
    pts[60:68] = [(82, 140), (92, 137), (100, 138), (108, 137), (118, 140), (108, 143), (100, 144), (92, 143)]
    return pts


def _expression_fields():
    d = np.zeros((N_CLASSES, N_LANDMARKS, 2))
    # happy: mouth corners out and up, cheeks raise the lower eyelids
    d[1, 48] = (-6, -6); d[1, 54] = (6, -6)
    d[1, [49, 53]] = (0, -2); d[1, [55, 59]] = (0, -3)
    d[1, [40, 41, 46, 47]] = (0, -1.5)
    # sad: corners down, inner brows up
    d[2, 48] = (2, 5); d[2, 54] = (-2, 5)
    d[2, [21, 22]] = (0, -5); d[2, [20, 23]] = (0, -2)
    d[2, [56, 57, 58]] = (0, 1.5)
    # surprise: brows up, eyes wide, jaw drop
    d[3, 17:27] = (0, -8)
    d[3, [37, 38, 43, 44]] = (0, -2.5); d[3, [40, 41, 46, 47]] = (0, 2.5)
    d[3, 55:60] = (0, 12); d[3, 64:68] = (0, 10); d[3, 5:12] = (0, 8)
    # fear: brows up and drawn together, lips stretched
    d[4, 17:22] = (2, -5); d[4, 22:27] = (-2, -5)
    d[4, 48] = (-7, 1); d[4, 54] = (7, 1)
    d[4, [37, 38, 43, 44]] = (0, -2); d[4, 55:60] = (0, 4)
    # disgust: upper lip raised, nose wrinkled, brows lowered
    d[5, 49:54] = (0, -5); d[5, [31, 35]] = (0, -3); d[5, [32, 34]] = (0, -2)
    d[5, 17:27] = (0, 3); d[5, [40, 41, 46, 47]] = (0, -2)
    # anger: brows down and together, lips pressed
    d[6, 19:22] = (3, 6); d[6, 22:25] = (-3, 6); d[6, [17, 18, 25, 26]] = (0, 3)
    d[6, 49:54] = (0, 2); d[6, 55:60] = (0, -3); d[6, 48] = (3, 0); d[6, 54] = (-3, 0)
    # contempt: one-sided smirk
    d[7, 54] = (5, -6); d[7, [53, 55]] = (2, -3); d[7, 64] = (3, -3)
    return d


EXPRESSIONS = _expression_fields()


def synthetic_face(label, rng, intensity=1.0, jitter=1.0, identity=1.5):
    """Upright face on a 200 canvas: template + expression + identity shape + landmark noise."""
    pts = template_face()
    strength = intensity * rng.uniform(0.6, 1.4)
    pts = pts + strength * EXPRESSIONS[label]
    # per-identity proportions: face width, eye spacing, mouth height
    c = np.array([100.0, 100.0])
    stretch = 1 + identity * 0.03 * rng.standard_normal(2)
    pts = (pts - c) * stretch + c
    pts = pts + identity * rng.standard_normal((N_LANDMARKS, 2))
    pts = pts + jitter * rng.standard_normal((N_LANDMARKS, 2))
    return pts


def random_pose(points, rng, max_roll=math.radians(25), scale=(0.6, 2.5), canvas=(150, 1000)):
    """Place points on a random square source image with random roll, scale and offset."""
    theta = rng.uniform(-max_roll, max_roll)
    s = rng.uniform(*scale)
    tip = points[33]
    c, si = math.cos(theta), math.sin(theta)
    rot = np.array([[c, -si], [si, c]])
    moved = (points - tip) @ rot.T * s
    size = float(rng.integers(*canvas))
    lo = -moved.min(axis=0)
    hi = size - moved.max(axis=0)
    offset = np.array([rng.uniform(lo[i], max(lo[i], hi[i])) for i in range(2)])
    return LandmarkSet(moved + offset, size, size)


def face_dataset(n_per_class, seed=0, **face_kw):
    """Balanced set of posed synthetic faces: (ids, {id: LandmarkSet}, {id: label})."""
    rng = np.random.default_rng(seed)
    faces, labels = {}, {}
    for i in range(n_per_class * N_CLASSES):
        y = i % N_CLASSES
        rid = f"face{i:05d}"
        faces[rid] = random_pose(synthetic_face(y, rng, **face_kw), rng)
        labels[rid] = y
    return list(faces), faces, labels


def _peaked(pred, conf, rng, extra=None, extra_mass=0.0, concentration=2.0):
    """Probability vector with mass conf on pred, optional mass on extra, the rest Dirichlet."""
    rest = rng.dirichlet(np.full(N_CLASSES, concentration)) * (1.0 - conf - extra_mass)
    p = rest
    p[pred] += conf
    if extra is not None:
        p[extra] += extra_mass
    return p


def noisy_branch(truth, accuracy, rng, conf_correct=(0.35, 0.85), conf_wrong=(0.2, 0.5), hint=(0.05, 0.25)):
    """Simulated classifier: right with probability `accuracy`, otherwise a random wrong class.

    Wrong rows keep some mass ("hint") on the true class, as a real classifier
    usually ranks the truth high even when it misses.
    """
    n = len(truth)
    correct = rng.random(n) < accuracy
    wrong = (truth + rng.integers(1, N_CLASSES, n)) % N_CLASSES
    preds = np.where(correct, truth, wrong)
    probs = np.empty((n, N_CLASSES))
    for i in range(n):
        if correct[i]:
            probs[i] = _peaked(preds[i], rng.uniform(*conf_correct), rng)
        else:
            c = rng.uniform(*conf_wrong)
            m = min(rng.uniform(*hint), 0.9 * c)
            probs[i] = _peaked(preds[i], c, rng, truth[i], m)
    return probs


def two_branch_benchmark(n_per_class=500, seed=7, accuracy=0.6):
    """Truth labels and two independent noisy branches' probability rows."""
    rng = np.random.default_rng(seed)
    truth = np.repeat(np.arange(N_CLASSES), n_per_class)
    truth = truth[rng.permutation(len(truth))]
    p_a = noisy_branch(truth, accuracy, rng)
    p_b = noisy_branch(truth, accuracy, rng)
    return truth, p_a, p_b


# Item-type counts for the agreement fixture. Both-correct (1492) and the
# per-branch splits follow from the target totals: A right 2636, B right
# 2611, 1726 agreements, and 1949 / 314 / 531 among the 2794 disagreements.
AGREEMENT_LAYOUT = {
    "agree_correct": 1492,
    "agree_wrong": 234,
    "a_right_a_higher": 1000,
    "a_right_a_lower": 144,
    "b_right_b_higher": 949,
    "b_right_b_lower": 170,
    "neither": 531,
}


def agreement_fixture(seed=2023):
    """4520 items with a prescribed agreement structure between two branches.

    Returns (truth, probs_a, probs_b). Non-chosen classes share the leftover
    mass equally, so plain-sum fusion always follows the more confident
    branch on disagreements.
    """
    rng = np.random.default_rng(seed)
    kinds = np.concatenate([np.full(n, i) for i, n in enumerate(AGREEMENT_LAYOUT.values())])
    kinds = kinds[rng.permutation(len(kinds))]
    n = len(kinds)
    truth = np.arange(n) % N_CLASSES
    off1 = (truth + 1) % N_CLASSES
    off2 = (truth + 2) % N_CLASSES
    names = list(AGREEMENT_LAYOUT)

    pred_a = np.empty(n, dtype=np.int64)
    pred_b = np.empty(n, dtype=np.int64)
    a_high = np.empty(n, dtype=bool)
    for i, kind in enumerate(kinds):
        name = names[kind]
        if name == "agree_correct":
            pred_a[i] = pred_b[i] = truth[i]
            a_high[i] = rng.random() < 0.5
        elif name == "agree_wrong":
            pred_a[i] = pred_b[i] = off1[i]
            a_high[i] = rng.random() < 0.5
        elif name.startswith("a_right"):
            pred_a[i], pred_b[i] = truth[i], off1[i]
            a_high[i] = name.endswith("a_higher")
        elif name.startswith("b_right"):
            pred_a[i], pred_b[i] = off1[i], truth[i]
            a_high[i] = not name.endswith("b_higher")
        else:
            pred_a[i], pred_b[i] = off1[i], off2[i]
            a_high[i] = rng.random() < 0.5

    hi = np.round(rng.uniform(0.35, 0.9, n), 6)
    lo = np.round(hi - rng.uniform(0.02, hi - 0.15), 6)
    conf_a = np.where(a_high, hi, lo)
    conf_b = np.where(a_high, lo, hi)

    def rows(pred, conf):
        p = np.repeat(((1.0 - conf) / (N_CLASSES - 1))[:, None], N_CLASSES, axis=1)
        p[np.arange(n), pred] = conf
        return p

    return truth, rows(pred_a, conf_a), rows(pred_b, conf_b)
