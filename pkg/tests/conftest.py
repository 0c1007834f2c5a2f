import numpy as np
import pytest

from dmscope import _pykernels

try:
    from dmscope import _ckernels
except ImportError:  # extension not built
    _ckernels = None

# acceptance results, echoed again at the end of the run
ACCEPTANCE_LINES = []

BACKENDS = [pytest.param(_pykernels, id="python")]
if _ckernels is not None:
    BACKENDS.append(pytest.param(_ckernels, id="cython"))


@pytest.fixture(params=BACKENDS)
def backend(request):
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
