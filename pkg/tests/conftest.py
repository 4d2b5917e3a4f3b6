import pytest

from _corpus import DATA, fixture_topology
from eonvne.orchestrator import load_vn
from eonvne.reach import shipped_table

_REPORT: list[str] = []


@pytest.fixture
def report():
    """Collects one summary line per acceptance criterion, printed at session end."""
    return _REPORT.append


def pytest_terminal_summary(terminalreporter):
    if _REPORT:
        terminalreporter.section("acceptance criteria")
        for line in _REPORT:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def flex():
    return shipped_table("Flex-AT")


@pytest.fixture(scope="session")
def diamond_topo():
    return fixture_topology("diamond_topology")


@pytest.fixture(scope="session")
def diamond_vn():
    return load_vn(DATA.joinpath("diamond_vn.json").read_text())


@pytest.fixture(scope="session")
def nobel():
    return fixture_topology("nobel_germany")
