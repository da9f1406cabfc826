import pytest

_OUTCOMES: dict[int, list[bool]] = {}
_TITLES: dict[int, str] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion number n")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    n = mark.args[0]
    _TITLES[n] = mark.args[1] if len(mark.args) > 1 else item.name
    if rep.when == "call" or (rep.when == "setup" and rep.failed):
        _OUTCOMES.setdefault(n, []).append(rep.passed)


def pytest_terminal_summary(terminalreporter):
    if not _OUTCOMES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_TITLES):
        results = _OUTCOMES.get(n, [])
        status = "PASS" if results and all(results) else "FAIL"
        terminalreporter.write_line(f"criterion {n:2d}: {status}  {_TITLES[n]}")
