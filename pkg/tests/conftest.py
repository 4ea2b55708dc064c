import pytest

_ACCEPTANCE: list[str] = []


@pytest.fixture
def criterion():
    """Record one acceptance line; returns ``ok`` so tests can ``assert criterion(...)``."""

    def record(number: int, name: str, ok: bool, detail: str) -> bool:
        line = f"{'PASS' if ok else 'FAIL'}  [{number}] {name}: {detail}"
        _ACCEPTANCE.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in _ACCEPTANCE:
            terminalreporter.write_line(line)
