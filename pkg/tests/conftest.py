import numpy as np
import pytest

from ahgmm.dataset import synthetic_faces
from ahgmm.imageio import ImagePlane

# Lines appended by the acceptance suite; echoed at the end of the run.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def faces():
    return synthetic_faces(8, seed=123)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_image(rng, h, w, c=1) -> ImagePlane:
    return ImagePlane(rng.integers(0, 256, (c, h, w)).astype(np.float64))
