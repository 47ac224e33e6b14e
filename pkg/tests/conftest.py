import pytest
from hypothesis import HealthCheck, settings

from abdirac.model import critical_field

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

NUS = (0.1, 0.2, 0.3, 0.45)


def twelve_pairs():
    """(nu, a) in {0.1, 0.2, 0.3, 0.45} x {0, a(nu)/3, 2 a(nu)/3}."""
    return [(nu, f * critical_field(nu)) for nu in NUS for f in (0.0, 1 / 3, 2 / 3)]


SIX_PAIRS = [(0.3, 0.0), (0.2, 0.1), (0.1, 0.0), (0.45, 0.0), (0.3, 0.1), (0.1, 0.2)]


@pytest.fixture(scope="session")
def pairs12():
    return twelve_pairs()


ACCEPTANCE = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[ACCEPTANCE] = {}


def record_acceptance(config, number: int, passed: bool, detail: str) -> str:
    line = f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}"
    config.stash[ACCEPTANCE][number] = line
    return line


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE, {})
    if lines:
        terminalreporter.section("acceptance criteria")
        for n in sorted(lines):
            terminalreporter.write_line(lines[n])
