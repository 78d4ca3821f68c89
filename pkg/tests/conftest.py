import math

import pytest

from cgl_blowup import Grid, Params, StepControls, gaussian, simulate
from cgl_blowup.criteria import global_threshold, kappa_threshold
from cgl_blowup.functionals import gn_constant_estimate, mass

# Shared trajectories.  tol and growth_cap are chosen so centred differences
# between consecutive records resolve the identities to well below 1e-4.
DESK_GRID = (16.0, 256)
DESK_TOL = 1e-12
DESK_GROWTH_CAP = 0.003


def desk_grid():
    return Grid(*DESK_GRID)


@pytest.fixture(scope="session")
def pos_run():
    p = Params(math.pi / 6, 2.0, 0.5)
    u0 = gaussian(desk_grid(), 3.0, 1.0)
    c = StepControls(tol=DESK_TOL, t_max=1.0, growth_cap=DESK_GROWTH_CAP)
    return p, u0, simulate(u0, p, c)


@pytest.fixture(scope="session")
def neg_run():
    p = Params(0.1, 2.0, -0.2)
    g = desk_grid()
    k_star = kappa_threshold(gaussian(g, 1.0, 1.0), p)
    u0 = gaussian(g, 1.5 * k_star, 1.0)
    c = StepControls(tol=DESK_TOL, t_max=5.0, growth_cap=DESK_GROWTH_CAP)
    return p, u0, simulate(u0, p, c), k_star


@pytest.fixture(scope="session")
def small_run():
    p = Params(0.3, 1.0, -0.5)
    g = desk_grid()
    est = gn_constant_estimate(1.0, 1, g)
    thr = global_threshold(p, est)
    psi = gaussian(g, 1.0, 1.0)
    u0 = gaussian(g, 0.5 * thr.value / math.sqrt(mass(psi)), 1.0)
    c = StepControls(tol=DESK_TOL, t_max=50.0, dt_max=0.005)
    return p, u0, simulate(u0, p, c), est, thr


# Acceptance summary: tests marked acceptance(n, title) get one line each.

_RESULTS: dict[int, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is None:
        return
    number, title = mark.args
    if rep.when == "call" or (rep.when == "setup" and rep.failed):
        status = "PASS" if rep.passed else "FAIL"
        if _RESULTS.get(number, ("PASS",))[0] == "FAIL":
            status = "FAIL"  # one failing part fails the criterion
        _RESULTS[number] = (status, title)


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_RESULTS):
        status, title = _RESULTS[number]
        terminalreporter.write_line(f"criterion {number:2d}: {status}  {title}")
