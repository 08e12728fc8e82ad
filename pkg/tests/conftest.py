import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")


ACCEPTANCE_LINES = {}


@pytest.fixture
def record():
    """Store one summary line per acceptance criterion."""

    def _record(key, ok, detail):
        ACCEPTANCE_LINES[key] = f"criterion {key:>3}: {'PASS' if ok else 'FAIL'} | {detail}"
        return ok

    return _record


def _sort_key(key):
    digits = "".join(c for c in key if c.isdigit())
    return int(digits), key


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE_LINES, key=_sort_key):
            terminalreporter.write_line(ACCEPTANCE_LINES[key])
