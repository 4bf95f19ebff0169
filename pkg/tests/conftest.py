import pytest

_LINES: list[str] = []


@pytest.fixture
def report():
    """Record one PASS/FAIL line per acceptance criterion; returns the verdict."""

    def emit(label: str, ok: bool, detail: str) -> bool:
        line = f"{label:<4} {'PASS' if ok else 'FAIL'}  {detail}"
        _LINES.append(line)
        print(line, flush=True)
        return ok

    return emit


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in _LINES:
            terminalreporter.write_line(line)
