import pytest

from northpole.mc import ks_with_retry
from northpole.rng import RngStream

_ACCEPTANCE_LINES = []


@pytest.fixture
def rng(request):
    """A stream seeded from the test's node id, so every test is reproducible."""
    return RngStream(20240601).child(request.node.nodeid)


@pytest.fixture
def ks_pass(rng):
    """Assert a KS check passes under the retry-once policy.

    ``check(stream)`` must draw its data from the stream it is given.
    """

    def run(check, label=""):
        report, attempts = ks_with_retry(lambda attempt: check(rng.child(f"retry:{label}", attempt)))
        assert report.passed, f"{label}: KS {report.statistic:.5f} >= critical {report.critical:.5f} after {attempts} attempts"
        return report

    return run


@pytest.fixture(scope="session")
def acceptance_log():
    return _ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
