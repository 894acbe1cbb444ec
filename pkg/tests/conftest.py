import os

import numpy as np
import pytest

from atmr.core import Solution

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session", autouse=True)
def front_cache(request):
    """Keep reference fronts in pytest's own cache directory between sessions."""
    path = request.config.cache.mkdir("atmr-fronts")
    old = os.environ.get("ATMR_CACHE_DIR")
    os.environ["ATMR_CACHE_DIR"] = str(path)
    yield path
    if old is None:
        os.environ.pop("ATMR_CACHE_DIR", None)
    else:
        os.environ["ATMR_CACHE_DIR"] = old


@pytest.fixture
def report():
    """Record a one-line acceptance verdict for the terminal summary."""

    def _report(number: int, name: str, ok: bool, detail: str = "") -> None:
        line = f"criterion {number:>2} {'PASS' if ok else 'FAIL'}  {name}"
        ACCEPTANCE_LINES.append(line + (f"  ({detail})" if detail else ""))

    return _report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)


def make_solution(F, G=0.0, x=None) -> Solution:
    """A solution with the given objectives and violation (no real problem behind it)."""
    F = np.asarray(F, dtype=float)
    x = np.zeros(1) if x is None else np.asarray(x, dtype=float)
    return Solution(x=x, F=F, g_vals=np.array([G]), h_vals=np.zeros(0), G=float(G))
