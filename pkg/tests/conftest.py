import pytest

# one line per acceptance criterion, echoed at the end of the session
_CRITERIA: list[str] = []


@pytest.fixture
def criterion():
    """Record and print a PASS/FAIL line for an acceptance criterion."""

    def record(number: int, name: str, passed: bool, detail: str) -> bool:
        line = f"[{'PASS' if passed else 'FAIL'}] AC{number:<2} {name}: {detail}"
        _CRITERIA.append(line)
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_CRITERIA, key=lambda s: int(s.split("AC")[1].split()[0])):
            terminalreporter.write_line(line)
