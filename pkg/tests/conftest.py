import warnings

import pytest

from gravisat.equilibrium import SmallOrbitWarning


@pytest.fixture(autouse=True)
def _quiet_small_orbits():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SmallOrbitWarning)
        yield


_ACCEPTANCE = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py::test_criterion_" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and not report.passed):
        _ACCEPTANCE[report.nodeid] = report


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for nodeid in sorted(_ACCEPTANCE, key=lambda n: int(n.split("test_criterion_")[1].split("_")[0])):
        rep = _ACCEPTANCE[nodeid]
        name = nodeid.split("::")[-1]
        num = int(name.split("_")[2])
        status = "PASS" if rep.passed else "FAIL"
        line = f"criterion {num:2d}: {status}  {name}"
        if not rep.passed:
            msg = str(rep.longrepr.reprcrash.message) if hasattr(rep.longrepr, "reprcrash") else str(rep.longrepr)
            line += f"  ({msg.splitlines()[0][:160]})"
        terminalreporter.write_line(line)
