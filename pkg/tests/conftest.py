from __future__ import annotations

import pytest

RESULTS: dict = {}


@pytest.fixture
def record():
    """record(n, ok, detail): one acceptance line per criterion."""
    def _record(n: int, ok: bool, detail: str = ""):
        RESULTS[n] = (bool(ok), detail)
    return _record


def pytest_terminal_summary(terminalreporter):
    if not RESULTS:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(RESULTS):
        ok, detail = RESULTS[n]
        tr.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
