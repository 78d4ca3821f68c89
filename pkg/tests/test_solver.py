import cmath
import math

import mpmath as mp
import numpy as np
import pytest

from cgl_blowup import solver
from cgl_blowup.core import Grid, Params, TimeSeries, constant, gaussian, random_bandlimited
from cgl_blowup.functionals import mass
from cgl_blowup.ode import ode_blowup_time, ode_exact
from cgl_blowup.solver import StepControls, simulate


def _phi_oracle(z):
    z = mp.mpc(z)
    p1 = (mp.exp(z) - 1) / z
    p2 = (p1 - 1) / z
    p3 = (p2 - mp.mpf(1) / 2) / z
    return [complex(v) for v in (p1, p2, p3)]


@pytest.mark.parametrize("z", [1e-9, -0.3 + 0.2j, 0.99, -1.01, -5.0 - 3j, -40.0, 1e-3j])
def test_phi_functions(z):
    mp.mp.dps = 80
    got = solver.phi_functions(np.array([z]))
    for g, want in zip(got, _phi_oracle(z)):
        assert abs(g[0] - want) <= 1e-14 * abs(want)


def test_quantize_dt_ladder():
    for dt in (1e-3, 0.37, 2.0 ** (-5), 1e-13):
        q = solver.quantize_dt(dt)
        assert q <= dt * (1 + 1e-12)
        assert q > dt * 2 ** (-1 / solver.LADDER_PER_OCTAVE) * (1 - 1e-12)
        m = solver.LADDER_PER_OCTAVE * math.log2(q)
        assert abs(m - round(m)) < 1e-9


def test_controls_validation():
    with pytest.raises(ValueError):
        StepControls(dt_init=1e-16, dt_min=1e-14)
    with pytest.raises(ValueError):
        StepControls(tol=0.0)
    with pytest.raises(ValueError):
        StepControls(sup_blowup_threshold=1.0)
    with pytest.raises(ValueError):
        StepControls(safety=1.0)


def test_refuses_schroedinger_limit():
    g = Grid(4.0, 16)
    with pytest.raises(ValueError):
        simulate(gaussian(g), Params(math.pi / 2, 2.0, 0.0), StepControls())


def test_zero_data_decays_at_once():
    out = simulate(constant(Grid(4.0, 16), 0.0), Params(0.1, 2.0, 0.0), StepControls())
    assert out.kind == "Decayed" and out.t_final == 0.0 and len(out.series) == 1


def test_constant_data_follows_ode():
    p = Params(0.3, 2.0, -0.5)
    g = Grid(16.0, 16)
    v0 = 1.5
    out = simulate(constant(g, v0), p, StepControls(tol=1e-12, t_max=1.0), store_fields=True)
    ts = ode_blowup_time(v0, p)
    assert out.kind == "BlowupDetected"
    assert out.t_star == pytest.approx(ts, rel=1e-6)
    for rec, f in zip(out.series, out.fields):
        if rec.t < 0.9 * ts:
            v = ode_exact(v0, p, rec.t)
            assert np.max(np.abs(f.values - v)) <= 1e-8 * abs(v)


def test_linear_flow_matches_semigroup():
    g = Grid(10.0, 64)
    u0 = random_bandlimited(g, 7, 6)
    p = Params(0.7, 2.0, 0.0)
    out = simulate(u0, p, StepControls(t_max=0.3), linear_only=True)
    ref = solver.semigroup_apply(u0, 0.3, 0.7)
    assert out.kind == "ReachedHorizon" and out.t_final == pytest.approx(0.3)
    assert np.max(np.abs(out.final_field.values - ref.values)) < 1e-12


def test_linear_only_keeps_damping_term():
    g = Grid(10.0, 32)
    u0 = constant(g, 1.0)
    out = simulate(u0, Params(0.0, 2.0, -1.0), StepControls(t_max=1.0), linear_only=True)
    assert out.final_field.values[0] == pytest.approx(math.exp(-1.0), rel=1e-12)


def test_recording_cadence_does_not_change_stepping():
    g = Grid(8.0, 64)
    u0 = gaussian(g, 1.0)
    p = Params(0.2, 2.0, 0.3)
    a = simulate(u0, p, StepControls(t_max=0.2, tol=1e-10))
    b = simulate(u0, p, StepControls(t_max=0.2, tol=1e-10, record_every=2))
    sub = a.series.records[::2]
    assert [r.t for r in b.series.records[:len(sub)]] == [r.t for r in sub]
    assert b.series.records[-1].t == a.series.records[-1].t


def test_diagnostics_are_phase_invariant():
    g = Grid(8.0, 64)
    u0 = random_bandlimited(g, 11, 5)
    p = Params(0.4, 2.0, 0.2)
    c = StepControls(t_max=0.1, tol=1e-10)
    a = simulate(u0, p, c).series
    b = simulate(u0 * cmath.exp(0.9j), p, c).series
    for name in ("mass", "energy", "variational", "ut_sq", "re_inner", "im_inner"):
        assert np.allclose(a.column(name), b.column(name), rtol=1e-9, atol=1e-12)


def test_step_and_rhs():
    g = Grid(8.0, 64)
    u0 = gaussian(g, 1.0)
    p = Params(0.0, 2.0, 0.0)
    new, err = solver.step(u0, 1e-3, p)
    ut = solver.rhs(u0, p)
    assert 0 < err < 1e-10
    assert np.max(np.abs((new.values - u0.values) / 1e-3 - ut.values)) < 1e-2
    with pytest.raises(ValueError):
        solver.step(u0, 0.0, p)


def test_global_order_of_accuracy():
    g = Grid(16.0, 64)
    u0 = gaussian(g, 1.0)
    p = Params(0.3, 2.0, 0.0)
    ref, _ = solver.integrate_fixed(u0, p, 0.5 / 640, 640)
    errs = []
    for m in (20, 40):
        u, _ = solver.integrate_fixed(u0, p, 0.5 / m, m)
        errs.append(math.sqrt(mass(u.with_values(u.values - ref.values))))
    assert 12 <= errs[0] / errs[1] <= 20


def test_outcome_series_type():
    out = simulate(gaussian(Grid(8.0, 32), 0.2), Params(0.0, 1.0, -1.0),
                   StepControls(t_max=0.1))
    assert isinstance(out.series, TimeSeries)
    assert out.kind == "ReachedHorizon"
    assert "ReachedHorizon" in out.describe()
