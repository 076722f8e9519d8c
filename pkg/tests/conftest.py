import pytest

_ACCEPTANCE = []


@pytest.fixture
def criterion():
    """Record one PASS/FAIL line; printed at the end of the session."""

    def record(number, title, ok, detail):
        line = f"criterion {number:>2} {'PASS' if ok else 'FAIL'}  {title}: {detail}"
        _ACCEPTANCE.append((number, line))
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(_ACCEPTANCE):
        terminalreporter.write_line(line)
