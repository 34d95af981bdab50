import pytest

from rareach.pcp import PcpInstance, compile_pcp, pcp_witness

from tests import corpus


@pytest.fixture(scope="session")
def mp_program():
    return corpus.mp()


@pytest.fixture(scope="session")
def pcp_inst():
    # alpha = (a, ab), beta = (aa, b); solved by 1,2 -> "aab"
    return PcpInstance((("a", "aa"), ("ab", "b")))


@pytest.fixture(scope="session")
def gadget(pcp_inst):
    return compile_pcp(pcp_inst)


@pytest.fixture(scope="session")
def witness(pcp_inst):
    return pcp_witness(pcp_inst, (1, 2))


@pytest.fixture(scope="session")
def long_witness(pcp_inst):
    # "aabaab": long enough for the stream values to repeat mod 4
    return pcp_witness(pcp_inst, (1, 2, 1, 2))


def pytest_terminal_summary(terminalreporter):
    """Repeat the acceptance pass/fail lines after the test summary."""
    import sys

    module = sys.modules.get("tests.test_acceptance")
    lines = getattr(module, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.line(line)
