import cmath
import math

import numpy as np
import pytest

from cgl_blowup import monitors as M
from cgl_blowup.core import Grid, Params, TimeSeries, constant, gaussian, random_bandlimited
from cgl_blowup.criteria import eta
from cgl_blowup.ode import ode_blowup_time, ode_exact
from cgl_blowup.solver import StepControls, simulate

CONST_GRID = Grid(16.0, 16)


def constant_run(p, v0, frac=0.05):
    # Record spacing ~ 2e-5 / rate keeps second-order differencing near 1e-9.
    t_end = frac * ode_blowup_time(v0, p)
    c = StepControls(tol=1e-12, t_max=t_end, growth_cap=2e-5)
    return simulate(constant(CONST_GRID, v0), p, c)


@pytest.fixture(scope="module")
def const_pos():
    p = Params(0.2, 1.0, 0.5)
    return p, 1.0, constant_run(p, 1.0)


@pytest.fixture(scope="module")
def const_neg():
    p = Params(0.1, 2.0, -0.2)
    return p, 2.0, constant_run(p, 2.0)


def test_constant_runs_satisfy_identities_tightly(const_pos, const_neg):
    for p, _, out in (const_pos, const_neg):
        assert M.residual_mass_identity(out.series, p).max_rel_residual <= 1e-8
        assert M.residual_energy_identity(out.series, p).max_rel_residual <= 1e-8


def test_monotone_quantity_matches_ode(const_pos):
    p, v0, out = const_pos
    rep = M.monitor_pos(out.series, p)
    assert rep.passed
    vol = CONST_GRID.box_volume
    t = out.series.column("t")
    oracle = vol ** (-p.alpha / 2) * np.exp(p.gamma * p.alpha * t) / (p.alpha + 2)
    assert np.max(np.abs(rep.series["monotone"] / oracle - 1)) <= 1e-6


def test_shifted_energy_matches_ode(const_neg):
    p, v0, out = const_neg
    rep = M.monitor_neg(out.series, p)
    assert rep.passed
    t = out.series.column("t")
    r = np.abs(ode_exact(v0, p, t))
    vol = CONST_GRID.box_volume
    oracle = vol * (-r ** (p.alpha + 2) / (p.alpha + 2) + eta(p) * r ** 2)
    assert np.max(np.abs(rep.series["shifted_energy"] / oracle - 1)) <= 1e-6


def test_linear_heat_flow_mass_identity():
    g = Grid(10.0, 64)
    out = simulate(gaussian(g, 1.0), Params(0.0, 2.0, 0.0),
                   StepControls(t_max=0.5, dt_max=5e-4), linear_only=True)
    rep = M.residual_mass_identity(out.series, out.series.params)
    assert rep.max_rel_residual <= 1e-6 and rep.passed
    assert np.all(np.diff(out.series.column("mass")) <= 0)


def test_theta_zero_energy_identity_and_gamma_zero_monotonicity():
    g = Grid(16.0, 128)
    u0 = gaussian(g, 1.0, 1.0)
    for p in (Params(0.0, 2.0, 0.3), Params(0.4, 2.0, 0.0)):
        out = simulate(u0, p, StepControls(t_max=0.5, tol=1e-12, dt_max=2e-3))
        rep = M.residual_energy_identity(out.series, p)
        assert rep.passed, rep.text()
    assert "non-increasing" in rep.notes


def test_monitors_refuse_wrong_regimes():
    g = Grid(16.0, 128)
    out = simulate(gaussian(g, 0.5), Params(0.2, 2.0, 0.5), StepControls(t_max=0.05))
    with pytest.raises(M.HypothesisError, match="blowup hypotheses not met"):
        M.monitor_pos(out.series, out.series.params)
    with pytest.raises(M.HypothesisError):
        M.monitor_neg(out.series, out.series.params)
    short = TimeSeries(out.series.params, out.series.records[:2])
    with pytest.raises(ValueError):
        M.residual_mass_identity(short, short.params)


def test_monitor_neg_rejects_failed_hypotheses():
    g = Grid(16.0, 128)
    p = Params(0.1, 2.0, -0.2)
    out = simulate(gaussian(g, 0.5), p, StepControls(t_max=0.05))
    with pytest.raises(M.HypothesisError, match="blowup hypotheses not met"):
        M.monitor_neg(out.series, p)


def test_monitor_quantities_are_phase_invariant():
    g = Grid(8.0, 64)
    u0 = random_bandlimited(g, 4, 4, amplitude=2.0)
    p = Params(0.3, 2.0, 0.4)
    c = StepControls(t_max=0.05, tol=1e-11)
    a = simulate(u0, p, c).series
    b = simulate(u0 * cmath.exp(2.1j), p, c).series
    ra, rb = M.residual_energy_identity(a, p), M.residual_energy_identity(b, p)
    assert ra.max_rel_residual == pytest.approx(rb.max_rel_residual, rel=1e-3, abs=1e-10)


def test_report_passed_invariant():
    r = M.MonitorReport("x", 1e-5, [], 1e-4)
    assert r.passed
    assert not M.MonitorReport("x", 1e-3, [], 1e-4).passed
    assert not M.MonitorReport("x", 0.0, [(0.0, "bad")], 1e-4).passed


def test_near_singular_intervals_are_flagged_not_failed(pos_run):
    p, _, out = pos_run
    rep = M.residual_mass_identity(out.series, p)
    assert rep.passed and rep.degraded
    assert M.NEAR_SINGULAR in rep.text()


def test_minorant_dominated(pos_run):
    p, _, out = pos_run
    rep = M.monitor_pos(out.series, p)
    below = out.series.column("sup_norm") < 1e3
    ft = rep.series["f_tilde"][below]
    assert np.all(ft >= rep.series["minorant"][below] * (1 - 1e-9))
