from pathlib import Path

import numpy as np
import pytest

from emofuse.alignment import LandmarkSet
from emofuse.synthetic import synthetic_face

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def face(rng):
    """An upright synthetic face on the 200x200 canvas."""
    return LandmarkSet(synthetic_face(0, rng))


@pytest.fixture
def fixtures_dir():
    return FIXTURES


def random_probs(rng, n, concentration=1.0):
    return rng.dirichlet(np.full(8, concentration), size=n)


# one summary line per acceptance criterion, printed after the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
