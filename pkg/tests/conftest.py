import pytest

from spinfeedback.coupling import REFERENCE_CHANNEL, REFERENCE_PHYSICAL


@pytest.fixture
def ref_physical():
    return REFERENCE_PHYSICAL


@pytest.fixture
def ref_channel():
    return REFERENCE_CHANNEL


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("tests.test_acceptance")
    if module is None or not module.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(module.RESULTS):
        terminalreporter.write_line(module.RESULTS[n])
