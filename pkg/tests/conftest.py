import numpy as np
import pytest

from fleetenergy.geo import GeoPoint, from_local_xy
from fleetenergy.road_network import FeatureIndex, OsmFeature
from fleetenergy.synth import Grid, synthetic_fleet

ORIGIN = GeoPoint(35.05, -85.30)


def xy_feature(fid, xy, origin=ORIGIN, road_type="residential"):
    """Feature from local metric coordinates around ``origin``."""
    xy = np.asarray(xy, dtype=float)
    lat, lon = from_local_xy(xy[:, 0], xy[:, 1], origin.lat, origin.lon)
    return OsmFeature(fid, tuple(GeoPoint(float(a), float(b)) for a, b in zip(lat, lon)), road_type)


def xy_point(x, y, origin=ORIGIN):
    lat, lon = from_local_xy(x, y, origin.lat, origin.lon)
    return GeoPoint(float(lat), float(lon))


@pytest.fixture(scope="session")
def grid():
    return Grid(8, 8, 200.0)


@pytest.fixture(scope="session")
def grid_index(grid):
    return FeatureIndex(grid.feature_list())


@pytest.fixture(scope="session")
def fleet_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("fleet")
    synthetic_fleet(d, seed=3, n_electric=2, n_diesel=2, hours=0.75)
    return d


@pytest.fixture(scope="session")
def fast_overrides():
    return {"epochs": 15, "hidden": {"electric": [12, 8], "diesel": [16, 8, 4]}}


# --- acceptance reporting ----------------------------------------------------

_ACCEPTANCE = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): one numbered acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is None:
        return
    number, title = mark.args
    failed = rep.failed or (rep.when == "call" and rep.skipped)
    if rep.when == "call" or failed:
        detail = dict(item.user_properties).get("detail", "")
        if failed and not detail:
            detail = rep.longreprtext.strip().splitlines()[-1] if rep.longreprtext else rep.when
        prev = _ACCEPTANCE.get(number)
        if prev is None or prev[0] == "PASS":
            _ACCEPTANCE[number] = ("FAIL" if failed else "PASS", title, detail)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        status, title, detail = _ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number} {status} {title}: {detail}")
