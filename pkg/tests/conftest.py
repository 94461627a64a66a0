import os
import warnings

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", deadline=None, max_examples=25,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture],
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture(autouse=True)
def _quiet_numpy():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        yield


def dft_matrix(n: int) -> np.ndarray:
    """Explicit unitary DFT on the 2 pi torus, rows in FFT frequency order."""
    k = np.fft.fftfreq(n, 1.0 / n)
    x = 2 * np.pi * np.arange(n) / n
    return np.exp(-1j * np.outer(k, x)) * np.sqrt(2 * np.pi) / n


def inverse_dft_matrix(n: int) -> np.ndarray:
    k = np.fft.fftfreq(n, 1.0 / n)
    x = 2 * np.pi * np.arange(n) / n
    return np.exp(1j * np.outer(x, k)) / np.sqrt(2 * np.pi)


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance_line():
    """Record one PASS/FAIL line for the end-of-run acceptance summary."""
    def record(label: str, passed: bool, detail: str, elapsed: float, budget: float):
        line = f"{label} {'PASS' if passed else 'FAIL'} {detail} ({elapsed:.1f} s of {budget:.0f} s)"
        ACCEPTANCE_LINES.append(line)
        print(line)
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[0][2:])):
            terminalreporter.write_line(line)
