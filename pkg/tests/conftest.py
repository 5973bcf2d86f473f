import pytest

# criterion number -> (title, outcome, detail); filled by the acceptance tests
RESULTS: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(num, title): acceptance criterion checked by a test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when not in ("setup", "call"):
        return
    num, title = mark.args
    if rep.when == "setup" and rep.passed:
        return
    detail = dict(item.user_properties).get("detail", "")
    if rep.failed:
        msg = str(rep.longrepr).strip().splitlines()
        detail = (detail + " | " if detail else "") + (msg[-1] if msg else "error")
    RESULTS[num] = (title, "PASS" if rep.passed else "FAIL", detail)


def pytest_terminal_summary(terminalreporter):
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(RESULTS):
        title, status, detail = RESULTS[num]
        terminalreporter.write_line(f"criterion {num} {status}: {title}" + (f" ({detail})" if detail else ""))
