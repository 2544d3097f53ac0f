import time
from contextlib import contextmanager

import pytest

_lines: list[str] = []


@pytest.fixture
def criterion():
    """Context manager that times one acceptance criterion and logs a pass/fail line."""

    @contextmanager
    def run(number: int, title: str, limit: float | None = None):
        notes: dict = {}
        start = time.perf_counter()
        try:
            yield notes
            elapsed = time.perf_counter() - start
            notes["time"] = f"{elapsed:.1f}s"
            if limit is not None:
                assert elapsed < limit, f"took {elapsed:.1f}s, limit {limit:g}s"
        except BaseException as exc:
            line = f"criterion {number:>2} FAIL  {title}: {type(exc).__name__}: {str(exc).splitlines()[0] if str(exc) else ''}"
            _lines.append(line)
            print(line)
            raise
        detail = ", ".join(f"{k}={v}" for k, v in notes.items())
        line = f"criterion {number:>2} PASS  {title} ({detail})"
        _lines.append(line)
        print(line)

    return run


def pytest_terminal_summary(terminalreporter):
    if _lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_lines, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
