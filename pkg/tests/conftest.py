"""Acceptance bookkeeping: one PASS/FAIL line per criterion after the run."""

import pytest

CRITERIA = {
    1: "exact floor inequality for mu_n",
    2: "mu_n / nu_n distance identity and bound",
    3: "tau lower bound on the corpus and mu_n upper bound",
    4: "binomial cascade oracle and Legendre at tau'(1)",
    5: "Lebesgue identities",
    6: "branching count oracle and growth bounds",
    7: "Cantor mass identities and scaling ratio",
    8: "ball-mass floor at approximation centres",
    9: "transport metric axioms and oracles",
    10: "CLI determinism",
}

_outcomes = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(n): test backing acceptance criterion n")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    n = marker.args[0]
    ok, seconds = _outcomes.get(n, (True, 0.0))
    if report.when == "call" or report.failed or report.skipped:
        ok = ok and report.passed
    _outcomes[n] = (ok, seconds + report.duration)


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for n, title in CRITERIA.items():
        if n in _outcomes:
            ok, seconds = _outcomes[n]
            status = "PASS" if ok else "FAIL"
            terminalreporter.write_line(f"ACCEPTANCE {n:2d} {status} {title} ({seconds:.2f} s)")
        else:
            terminalreporter.write_line(f"ACCEPTANCE {n:2d} FAIL {title} (not run)")
