import numpy as np
import pytest
from fractions import Fraction as F

from riccati_families import HareProblem

JORDAN_A = np.array([[0.5, 0, 0, 0], [0, 2.0, 0, 0], [1.0, 0, 0.5, 0], [0, 1.0, 0, 2.0]])


def _exact(rows):
    return np.array([[float(F(x)) for x in r] for r in rows])


# the nonsingular solution, the solution outside every family, and its pinv
Q0 = _exact([["-87/100", 0, "9/50", 0], [0, "21/5", 0, "9/5"],
             ["9/50", 0, "-27/100", 0], [0, "9/5", 0, "27/10"]])
Q1 = _exact([["-3/13", "9/13", 0, 0], ["9/13", "12/13", 0, 0], [0, 0, 0, 0], [0, 0, 0, 0]])
Q1_PINV = _exact([["-4/3", 1, 0, 0], [1, "1/3", 0, 0], [0, 0, 0, 0], [0, 0, 0, 0]])


@pytest.fixture
def jordan_problem():
    return HareProblem(JORDAN_A, np.eye(4))


@pytest.fixture
def split_problem():
    return HareProblem(np.diag([2.0, 0.5]), np.eye(2))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


_ACCEPTANCE = []


@pytest.fixture
def acceptance_log(capsys):
    """Record and immediately show one pass/fail line per criterion."""
    def record(number, ok, detail):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'} ({detail})"
        _ACCEPTANCE.append(line)
        with capsys.disabled():
            print(f"\n{line}")
    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE):
            terminalreporter.write_line(line)
