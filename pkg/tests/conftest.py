import pytest

from carlfel.presets import run_preset

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(key, title): acceptance criterion covered by the test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or not (rep.when == "call" or rep.failed):
        return
    key, title = marker.args
    entry = _CRITERIA.setdefault(key, {"title": title, "passed": True, "measured": []})
    entry["passed"] &= rep.passed
    entry["measured"] += [v for k, v in item.user_properties if k == "measured"]


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_CRITERIA, key=lambda k: (int(k.rstrip("ab")), k)):
        e = _CRITERIA[key]
        status = "PASS" if e["passed"] else "FAIL"
        detail = "; ".join(e["measured"])
        terminalreporter.write_line(f"{status}  criterion {key}: {e['title']}  [{detail}]")


@pytest.fixture(scope="session")
def preset(tmp_path_factory):
    """Run each named preset once per session, writing into a temporary directory."""
    cache = {}

    def get(name):
        if name not in cache:
            cache[name] = run_preset(name, tmp_path_factory.mktemp("presets"), figures=False)
        return cache[name]

    return get
