import numpy as np
import pytest

from semimplicit._accel import HAVE_NUMBA

BACKENDS = ["numpy"] + (["numba"] if HAVE_NUMBA else [])


@pytest.fixture(params=BACKENDS)
def backend(request):
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# acceptance criteria report: criterion number -> "PASS/FAIL  text"
ACCEPTANCE = {}


@pytest.fixture
def report():
    def record(number, ok, text):
        line = f"{'PASS' if ok else 'FAIL'}  criterion {number:2d}: {text}"
        ACCEPTANCE[number] = line
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[k])
