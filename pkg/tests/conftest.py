import pytest

ACCEPTANCE_LINES = []


def pytest_addoption(parser):
    parser.addoption("--acceptance-fast", action="store_true", help="run the acceptance suite at reduced sizes")


@pytest.fixture(scope="session")
def acceptance_fast(request):
    return request.config.getoption("--acceptance-fast")


@pytest.fixture(scope="session")
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
