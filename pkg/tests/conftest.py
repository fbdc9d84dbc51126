import itertools

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

_LOWER = np.array([[0.0, 1.0], [0.0, 0.0]])  # hard-core annihilator on one site


def site_annihilator(site, n_sites):
    """Hard-core annihilation operator on the full 2**n_sites Fock space (tests only)."""
    mats = [_LOWER if s == site else np.eye(2) for s in range(n_sites)]
    out = mats[0]
    for m in mats[1:]:
        out = np.kron(out, m)
    return out


def fock_sector_projector(n_sites, n_exc):
    """Columns selecting the Fock states with ``n_exc`` particles, ordered like ``build_basis``."""
    cols = []
    for config in itertools.combinations(range(n_sites), n_exc):
        # site 0 is the most significant factor; index 1 of a factor is "occupied"
        cols.append(sum(1 << (n_sites - 1 - s) for s in config))
    proj = np.zeros((2**n_sites, len(cols)))
    proj[cols, range(len(cols))] = 1.0
    return proj


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# acceptance bookkeeping: tests marked ``criterion(n, title)`` get one summary line each
_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or (report.when != "call" and not report.failed):
        return
    number, title = mark.args
    entry = _CRITERIA.setdefault(number, {"title": title, "ok": True, "checks": []})
    entry["ok"] &= report.passed
    entry["checks"].append((item.name, report.passed))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        entry = _CRITERIA[number]
        status = "PASS" if entry["ok"] else "FAIL"
        terminalreporter.write_line(f"criterion {number:>2}: {status}  {entry['title']}")
        for name, passed in entry["checks"]:
            terminalreporter.write_line(f"    {'ok  ' if passed else 'FAIL'} {name}")
