"""Collects acceptance verdicts and prints them after the run."""
import pytest

_VERDICTS = {}


@pytest.fixture
def verdict():
    """``verdict(n, ok, title, detail)`` records and prints one acceptance line."""
    def record(n, ok, title, detail=""):
        line = f"ACCEPTANCE {n:2d} {'PASS' if ok else 'FAIL'}  {title}" + (f" ({detail})" if detail else "")
        _VERDICTS[n] = line
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if _VERDICTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(_VERDICTS):
            terminalreporter.write_line(_VERDICTS[n])
