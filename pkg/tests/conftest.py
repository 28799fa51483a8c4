import os
import sys

import numpy as np
import pytest
from hypothesis import settings

sys.path.insert(0, os.path.dirname(__file__))

from quatstat.qmatrix import QuatMatrix  # noqa: E402

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")


def random_qmatrix(rows, cols, rng):
    return QuatMatrix(rng.standard_normal((rows, cols, 4)))


def random_hermitian(n, rng):
    A = random_qmatrix(n, n, rng)
    return (A + A.H) * 0.5


def random_alpha_hermitian(n, axis, rng):
    A = random_qmatrix(n, n, rng)
    return (A + A.alpha_hermitian(axis)) * 0.5


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# acceptance criteria register here; the summary is printed after the run
ACCEPTANCE = {}


def record(criterion, ok, detail=""):
    ACCEPTANCE[criterion] = (bool(ok), detail)
    print(f"[{'PASS' if ok else 'FAIL'}] criterion {criterion}: {detail}")
    return ok


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: (int(str(k).split(".")[0]), str(k))):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {key:>4}  {detail}")
