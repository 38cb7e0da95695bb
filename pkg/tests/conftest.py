import pytest

CRITERIA = {
    1: "kernel calculus decompositions",
    2: "mass identity",
    3: "backward light-cone identity",
    4: "oracle triangle",
    5: "subcritical lifespan scaling",
    6: "property suite",
    7: "global regime for non-positive data",
    8: "approximation by the linear part",
}

_results = {}


@pytest.fixture
def acceptance():
    """Record one criterion outcome; the terminal summary prints them all."""

    def record(number, ok, detail):
        line = f"criterion {number} ({CRITERIA[number]}): {'PASS' if ok else 'FAIL'}  {detail}"
        _results[number] = line
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    ran = [n for n in CRITERIA if n in _results]
    touched = any(
        "test_acceptance" in getattr(r, "nodeid", "")
        for reps in terminalreporter.stats.values()
        for r in reps
        if hasattr(r, "nodeid")
    )
    if not ran and not touched:
        return
    terminalreporter.section("acceptance criteria")
    for n in CRITERIA:
        terminalreporter.write_line(_results.get(n, f"criterion {n} ({CRITERIA[n]}): FAIL  no result recorded"))
