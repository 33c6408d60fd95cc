import functools

import pytest

from frontspeed import builtin, minimal_speed

CATALOG = {
    "fisher": {},
    "hadeler_rothe": {"nu": 4.0},
    "bistable_cubic": {"a": 0.3},
    "degenerate_power": {"m": 2.0},
    "ignition": {"a": 0.2},
}

# Acceptance outcomes, filled by tests/test_acceptance.py and printed at session end.
ACCEPTANCE = {}


@functools.lru_cache(maxsize=None)
def solved(name, **params):
    """Reaction term and its oracle solution, computed once per session."""
    f = builtin(name, **params)
    return f, minimal_speed(f)


@pytest.fixture(params=sorted(CATALOG))
def catalog_term(request):
    return solved(request.param, **CATALOG[request.param])


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, title = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {title}")
