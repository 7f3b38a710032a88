import pytest

ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance_report():
    """Collects one pass/fail line per acceptance criterion."""

    def report(number, title, ok, detail):
        ACCEPTANCE_LINES.append((number, f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {title} -- {detail}"))
        return ok

    return report


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(line)
