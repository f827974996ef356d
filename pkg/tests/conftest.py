import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "coorbit", deadline=None, max_examples=40,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.differing_executors],
)
settings.load_profile("coorbit")


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


# One summary line per acceptance criterion, printed after the run.
_ACCEPTANCE = pytest.StashKey[dict]()


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): acceptance criterion")
    config.stash[_ACCEPTANCE] = {}


@pytest.hookimpl(wrapper=True)
def pytest_runtest_makereport(item, call):
    rep = yield
    mark = item.get_closest_marker("acceptance")
    if mark is not None and (rep.when == "call" or not rep.passed):
        number, title = mark.args
        details = "; ".join(f"{k}={v}" for k, v in item.user_properties)
        verdict = "PASS" if rep.passed else ("SKIP" if rep.skipped else "FAIL")
        item.config.stash[_ACCEPTANCE].setdefault(number, (verdict, title, details, rep.duration))
    return rep


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = config.stash.get(_ACCEPTANCE, {})
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        verdict, title, details, duration = results[number]
        line = f"{verdict}  [{number:2d}] {title} ({duration:.1f} s)"
        terminalreporter.write_line(line + (f"  {details}" if details else ""))
