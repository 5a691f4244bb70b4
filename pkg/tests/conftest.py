import functools

import pytest

from linstat import Potential, kernel_for

GUE = Potential.gaussian(1.0)
QUARTIC = Potential.quartic(3.0, 1.0)


@functools.lru_cache(maxsize=None)
def kernel(kind, n, g=1.0):
    V = Potential.gaussian(g) if kind == "gue" else Potential.quartic(3.0, 1.0)
    return kernel_for(V, n)


CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, text): acceptance criterion")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    crit = getattr(report, "_criterion", None)
    if crit is None:
        return
    prev = CRITERIA.get(crit, ("PASS", None))
    if prev[0] == "PASS" and not report.passed:
        CRITERIA[crit] = ("FAIL", report.nodeid.split("::")[-1])
    else:
        CRITERIA.setdefault(crit, prev)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is not None:
        rep._criterion = (mark.args[0], mark.args[1])


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for (num, text), (status, failing) in sorted(CRITERIA.items()):
        extra = f"  [{failing}]" if failing else ""
        terminalreporter.write_line(f"{status}  criterion {num:>2}: {text}{extra}")
