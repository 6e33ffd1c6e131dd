"""Shared pytest configuration: the acceptance-criterion summary hook.

Tests marked ``@pytest.mark.criterion(n)`` are grouped by number, and the
terminal summary prints one PASS/FAIL line per criterion (FAIL if any of its
tests failed).  Everything else is ordinary pytest.
"""

import pytest

CRITERION_TITLES = {
    1: "one-way repetition: RMS slope -1/2 and stated constant band",
    2: "two-way repetition: RMS within stated constant band",
    3: "bitwise protocol: all-bits-correct rate and per-run cell guarantee",
    4: "error x sends products: near-constant with log, super-SQL trend",
    5: "lossless send counters equal closed forms exactly",
    6: "retry cost: Monte Carlo mean attempts vs closed form",
    7: "entangled parity expectation equals cos(M phi)",
    8: "cost-ratio dip below unity and ordered crossovers",
    9: "eleven-bit reference point: cost-advantage ratio bands",
    10: "frame covariance of circuit outcome distributions",
}


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "criterion(n): part of acceptance criterion n"
    )
    config._criterion_results = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is not None and rep.when == "call":
        num = int(marker.args[0])
        item.config._criterion_results.setdefault(num, []).append(rep.passed)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = getattr(config, "_criterion_results", {})
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(results):
        verdict = "PASS" if all(results[num]) else "FAIL"
        title = CRITERION_TITLES.get(num, "")
        terminalreporter.write_line(f"criterion {num:02d}: {verdict}  {title}")
