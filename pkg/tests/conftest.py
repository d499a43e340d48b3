import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from saopt import _backend  # noqa: E402


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running statistical or end-to-end check")


@pytest.fixture(params=_backend.available())
def kernels(request):
    """Each available kernel backend in turn."""
    return _backend.load(request.param)


ACCEPTANCE_KEY = pytest.StashKey[list]()


@pytest.fixture
def acceptance_line(request):
    """Record one PASS/FAIL line per acceptance criterion for the terminal summary."""
    lines = request.config.stash.setdefault(ACCEPTANCE_KEY, [])

    def emit(number: int, ok: bool, detail: str):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
        lines.append(line)
        print(line)
        return ok

    return emit


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
