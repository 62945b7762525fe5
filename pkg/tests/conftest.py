import numpy as np
import pytest

from sisparse.bases import spike_fourier_pair
from sisparse.sispace import FrequencyGrid, cross_spectrum, dtft, synthesize_samples


@pytest.fixture(scope="session")
def grid():
    return FrequencyGrid(256)


@pytest.fixture(scope="session")
def small_grid():
    return FrequencyGrid(64)


@pytest.fixture(scope="session")
def pair4(grid):
    return spike_fourier_pair(4, 1.0, grid)


@pytest.fixture(scope="session")
def pair16(grid):
    return spike_fourier_pair(16, 1.0, grid)


def dft(N):
    n = np.arange(N)
    return np.exp(-2j * np.pi * np.outer(n, n) / N)


def two_onb_dictionary(phi, psi, grid):
    return cross_spectrum(phi, phi.concat(psi), grid)


def planted(m, support, grid, rng, length=6):
    seqs = np.zeros((m, length))
    seqs[list(support)] = rng.standard_normal((len(support), length))
    return dtft(seqs, grid)


def plant_samples(D, support, grid, rng, length=6):
    gamma = planted(D.cols, support, grid, rng, length)
    return gamma, synthesize_samples(D, gamma)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
