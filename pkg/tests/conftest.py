import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from cvsheet.initial_data import random_coeff_batch
from cvsheet.spectral import Grid, _from_coeffs

settings.register_profile("default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def grid64():
    return Grid(64)


@pytest.fixture
def grid128():
    return Grid(128)


def random_fields(grid, count, seed=0, stream=0, band=None, decay=2.0):
    c = random_coeff_batch(grid, count, seed=seed, decay=decay, band=band, stream=stream)
    return [_from_coeffs(grid, row) for row in c]


ACCEPTANCE_LINES: list[str] = []


def report(criterion: int, name: str, passed: bool, detail: str) -> None:
    """Record and print one acceptance line."""
    line = f"criterion {criterion:2d} [{'PASS' if passed else 'FAIL'}] {name}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
