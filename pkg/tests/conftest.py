import pytest

_OUTCOMES: dict[int, list[tuple[str, bool]]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    n = report.user_properties and dict(report.user_properties).get("criterion")
    if n:
        _OUTCOMES.setdefault(n, []).append((report.nodeid.split("::")[-1], report.passed))


@pytest.hookimpl(tryfirst=True)
def pytest_runtest_setup(item):
    m = item.get_closest_marker("criterion")
    if m:
        item.user_properties.append(("criterion", m.args[0]))


def pytest_terminal_summary(terminalreporter):
    if not _OUTCOMES:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(_OUTCOMES):
        results = _OUTCOMES[n]
        ok = all(p for _, p in results)
        failed = [name for name, p in results if not p]
        line = f"criterion {n}: {'PASS' if ok else 'FAIL'}"
        if failed:
            line += f"  (failing: {', '.join(failed)})"
        tr.write_line(line)
