from fractions import Fraction as F

import pytest

from epr_polytope.correlation import bell_restriction, conditionalize
from epr_polytope.quantum import build_epr_vector

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def default_vector():
    return build_epr_vector()


@pytest.fixture(scope="session")
def conditional_vector(default_vector):
    return conditionalize(default_vector)


@pytest.fixture(scope="session")
def restricted_vector(default_vector):
    return bell_restriction(default_vector)


@pytest.fixture
def acceptance_line():
    def record(number: int, title: str, passed: bool, detail: str = ""):
        status = "PASS" if passed else "FAIL"
        ACCEPTANCE_LINES.append(f"[{status}] criterion {number}: {title}" + (f" ({detail})" if detail else ""))

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
