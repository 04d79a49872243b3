import numpy as np
import pytest

from opendicke import ep_detuning, validate_params

# Frozen with a 40-digit mpmath oracle: Delta from the closed form, g_c as
# the root of det(A(g)) for a hand-written normal-phase drift matrix.
EP_DELTA = 1.575452572300695218
GC_EXC = 1.012794711592374155
GC_NONEXC = 0.7126096406869612370

_ACCEPTANCE_LINES = []


def record_acceptance(number, title, passed, detail=""):
    _ACCEPTANCE_LINES.append((number, title, passed, detail))


@pytest.fixture
def exc():
    return validate_params(1.0, 1.0, 0.5, ep_detuning(1.0, 0.5))


@pytest.fixture
def nonexc():
    return validate_params(1.0, 1.0, 0.5, 1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20261017)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, passed, detail in sorted(_ACCEPTANCE_LINES, key=lambda t: t[0]):
        mark = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{mark}] {number:>2}. {title}: {detail}")
