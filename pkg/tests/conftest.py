import pytest

_RESULTS: dict[int, list[tuple[bool, str]]] = {}


def record(criterion: int, ok: bool, detail: str) -> bool:
    _RESULTS.setdefault(criterion, []).append((bool(ok), detail))
    return ok


@pytest.fixture
def criterion():
    return record


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_RESULTS):
        parts = _RESULTS[num]
        status = "PASS" if all(ok for ok, _ in parts) else "FAIL"
        detail = "; ".join(d for _, d in parts)
        terminalreporter.write_line(f"criterion {num:2d}: {status}  {detail}")
