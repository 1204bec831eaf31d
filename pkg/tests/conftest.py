import numpy as np
import pytest

from hyperradiance.liouville import DensityMatrix
from hyperradiance.qspace import HilbertSpace

ACCEPTANCE_RESULTS = []


def two_mode_ket(coeffs, dims=(2, 2)):
    """Pure photon-phonon state from ``{(n, m): amplitude}``."""
    space = HilbertSpace(dims)
    ket = np.zeros(space.total_dim, dtype=complex)
    for (n, m), c in coeffs.items():
        ket[space.index((n, m))] = c
    return DensityMatrix.from_ket(space, ket)


@pytest.fixture
def rng():
    return np.random.default_rng(20240501)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(line)
