from contextlib import contextmanager

import numpy as np
import pytest

from fairdiv.cases import load_case

ACCEPTANCE_LINES = []


def record_criterion(name: str, status: str, note: str = ""):
    ACCEPTANCE_LINES.append(f"[{status}] {name}" + (f"  ({note})" if note else ""))


@contextmanager
def criterion(name: str, note: str = ""):
    """Record one acceptance-criterion outcome for the terminal summary."""
    ok = False
    try:
        yield
        ok = True
    finally:
        record_criterion(name, "PASS" if ok else "FAIL", note)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def inheritance():
    return load_case("inheritance")


@pytest.fixture(scope="session")
def warhol():
    return load_case("warhol")


@pytest.fixture(scope="session")
def divorce():
    return load_case("divorce")


@pytest.fixture(scope="session")
def company_law():
    return load_case("company-law")


def random_problem_matrix(rng, n, q, zero_share=0.0):
    """Utility matrix with every agent valuing something and every good valued."""
    while True:
        u = rng.uniform(0.5, 10.0, size=(n, q))
        if zero_share > 0:
            u = np.where(rng.uniform(size=(n, q)) < zero_share, 0.0, u)
        if np.all(u.sum(axis=1) > 0) and np.all(u.sum(axis=0) > 0):
            return u
