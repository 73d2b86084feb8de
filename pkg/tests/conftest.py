import pytest

from nlfront.kernels import KernelSpec, make_kernel
from nlfront.reactions import ReactionSpec, make_reaction

# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def uniform():
    return make_kernel(KernelSpec("uniform", {"a": 1.0}))


@pytest.fixture(scope="session")
def gaussian():
    return make_kernel(KernelSpec("gaussian", {"s": 1.0}))


@pytest.fixture(scope="session")
def logistic():
    return make_reaction(ReactionSpec("logistic", {"r": 1.0}))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
