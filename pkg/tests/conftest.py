from pathlib import Path

import pytest

from ffiwasawa.cli import load_config, make_context
from ffiwasawa.funfield import CurveData

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

_CRITERIA: dict[int, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(num, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    num, title = mark.args
    if rep.when == "call" or (rep.when == "setup" and rep.failed):
        status = "PASS" if rep.passed else "FAIL"
        note = getattr(item, "acceptance_note", "")
        _CRITERIA[num] = (status, f"{title}{' ' + note if note else ''}")


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_CRITERIA):
        status, title = _CRITERIA[num]
        terminalreporter.write_line(f"criterion {num:2d}: {status}  {title}")


def fixture_path(name: str) -> Path:
    return FIXTURES / name


@pytest.fixture(scope="session")
def cfg_fx1():
    return load_config(fixture_path("fx1_constant.ini"))


@pytest.fixture(scope="session")
def ctx_fx1(cfg_fx1):
    return make_context(cfg_fx1)


@pytest.fixture(scope="session")
def ctx_fx1_tower():
    return make_context(load_config(fixture_path("fx1_constant_tower.ini")))


@pytest.fixture(scope="session")
def cfg_fx3_cyc():
    return load_config(fixture_path("fx3_cyclotomic.ini"))


@pytest.fixture(scope="session")
def ctx_fx3_cyc(cfg_fx3_cyc):
    return make_context(cfg_fx3_cyc)


@pytest.fixture(scope="session")
def cfg_fx3_product():
    return load_config(fixture_path("fx3_product.ini"))


@pytest.fixture(scope="session")
def ctx_fx3_const():
    return make_context(load_config(fixture_path("fx3_constant_tower.ini")))


@pytest.fixture(scope="session")
def constant_curve():
    return CurveData.from_int_lists(5, [[0], [0], [0], [1], [1]])


@pytest.fixture(scope="session")
def legendre_curve():
    return CurveData.from_int_lists(5, [[0], [-1, -1], [0], [0, 1], [0]], {"inf": {"m": 4}})


@pytest.fixture(scope="session")
def fx3_curve():
    return CurveData.from_int_lists(3, [[1, -1], [0, -1], [0, -1], [0], [0]])
