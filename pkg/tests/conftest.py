import numpy as np
import pytest

from airbeam import ChirpSpec, build_staggered_array, log_chirp

PITCH = 6.1e-3
D_PROJ = PITCH / 2
C = 343.0
FS = 1e6


@pytest.fixture(scope="session")
def array32():
    """The default staggered two-row, 32-element layout."""
    return build_staggered_array(2, 16, PITCH, PITCH / 2, PITCH)


@pytest.fixture(scope="session")
def chirp():
    """Full-band downward log chirp at the default DAC rate."""
    return log_chirp(ChirpSpec(100e3, 20e3, 5e-3), FS)


@pytest.fixture(scope="session")
def band_freqs():
    return np.arange(20e3, 100e3 + 250.0, 500.0)


@pytest.fixture(scope="session")
def degree_angles():
    return np.arange(-90.0, 90.5, 1.0)
