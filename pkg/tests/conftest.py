import pytest

from sechyp_blockade.errmodel import load_or_build_table

ACCEPTANCE_RESULTS: dict[int, str] = {}


@pytest.fixture(scope="session")
def transfer_table():
    """Full default transfer table, cached on disk after the first build."""
    return load_or_build_table()


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_RESULTS):
        terminalreporter.write_line(ACCEPTANCE_RESULTS[k])
