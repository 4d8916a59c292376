import pytest

from sawlab.seriesio import load_fixture

# (criterion, passed, detail) lines collected by the acceptance suite; passed is None when skipped
ACCEPTANCE_LINES: list[tuple[str, bool | None, str]] = []


@pytest.fixture(scope="session")
def square_worms():
    return load_fixture("square")


@pytest.fixture(scope="session")
def tri_worms():
    return load_fixture("triangular")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in ACCEPTANCE_LINES:
        status = "SKIP" if ok is None else "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"{status}  {name}: {detail}")
