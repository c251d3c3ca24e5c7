import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from hokdv.coeffs import ModelParameters, compute_equation_coefficients  # noqa: E402
from hokdv.spectral import PeriodicGrid, WaveField  # noqa: E402


@pytest.fixture(scope="session")
def ham_params():
    # theta = 1 with lam1 = 2 gives delta1 = 11/240 > 0 at the Hamiltonian rho
    return ModelParameters.with_hamiltonian_rho(1.0, 0.0, 0.0, 2.0, 0.0)


@pytest.fixture(scope="session")
def ham_ec(ham_params):
    return compute_equation_coefficients(ham_params)


@pytest.fixture
def grid64():
    return PeriodicGrid(256, 64.0)


def gaussian(grid, amplitude=0.1, width=4.0, center=None):
    c = grid.length / 2 if center is None else center
    return WaveField.from_function(grid, lambda x: amplitude * np.exp(-((x - c) / width) ** 2))


ACCEPTANCE_LINES = []


def record_criterion(number, title, ok, detail=""):
    """Log one acceptance line (shown in the terminal summary) and return ``ok``."""
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {title}"
    if detail:
        line += f"  ({detail})"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)
