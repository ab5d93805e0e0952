import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from PIL import Image
from scipy import ndimage

sys.path.insert(0, str(Path(__file__).parent))

from biphoton.fields import GridSpec  # noqa: E402
from biphoton.spdc import ReferenceSpec  # noqa: E402

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

W_P = 1.76

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def grid():
    return GridSpec(256, 0.055)


@pytest.fixture(scope="session")
def small_grid():
    return GridSpec(64, 0.11)


@pytest.fixture(scope="session")
def ref():
    return ReferenceSpec(w_r=3.0, Lambda=0.55, a=1.0)


def write_smiley(directory: Path, size: int = 64):
    """Smooth amplitude face and an azimuthal phase ramp as netpbm files."""
    yy, xx = np.mgrid[0:size, 0:size] * (64 / size)
    amp = (np.abs(np.hypot(xx - 32, yy - 32) - 18) < 3).astype(float)
    amp += (np.hypot(xx - 25, yy - 26) < 4) + (np.hypot(xx - 39, yy - 26) < 4)
    amp = ndimage.gaussian_filter(amp, 2.0 * size / 64) + 0.05
    phase = (np.arctan2(yy - 32, xx - 32) % (2 * np.pi)) / (2 * np.pi) * 256
    a_path, p_path = directory / "face_amp.pgm", directory / "face_phase.pgm"
    Image.fromarray(np.round(amp / amp.max() * 65535).astype(np.uint16)).save(a_path)
    Image.fromarray(np.clip(phase, 0, 255).astype(np.uint8)).save(p_path)
    return str(a_path), str(p_path)


@pytest.fixture(scope="session")
def smiley(tmp_path_factory):
    return write_smiley(tmp_path_factory.mktemp("raster"))
