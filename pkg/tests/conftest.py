import re
import sys
from importlib import resources
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from sandmine.catalog import default_catalog  # noqa: E402
from sandmine.ir import AppPair, load_app  # noqa: E402

DATA = Path(str(resources.files("sandmine.data")))
FIXTURES = DATA / "fixtures"


@pytest.fixture(scope="session")
def catalog():
    return default_catalog()


@pytest.fixture(scope="session")
def sms_leak(catalog):
    return load_app(FIXTURES / "sms_leak.app", catalog)


def load_listing(name, catalog):
    d = FIXTURES / "listings" / name
    return AppPair(name, load_app(d / "benign.app", catalog), load_app(d / "malign.app", catalog))


@pytest.fixture(scope="session")
def listings(catalog):
    return {n: load_listing(n, catalog) for n in ("screenguru", "mathref", "smartrabbits", "flyracing")}


_CRITERION = re.compile(r"test_acceptance\.py::test_criterion_(\d+)")


def pytest_terminal_summary(terminalreporter):
    results = {}
    for outcome in ("passed", "failed", "error", "skipped"):
        for rep in terminalreporter.stats.get(outcome, []):
            m = _CRITERION.search(getattr(rep, "nodeid", ""))
            if not m:
                continue
            n = int(m.group(1))
            ok = outcome == "passed"
            results[n] = results.get(n, True) and ok
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        terminalreporter.write_line(f"criterion {n}: {'PASS' if results[n] else 'FAIL'}")
