"""Acceptance suite: one marked group per criterion, summarized at the end of the run."""

import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from cgl_blowup import monitors as M
from cgl_blowup.core import (Field, Grid, Params, TimeSeries, constant, default_grid, gaussian,
                             random_bandlimited)
from cgl_blowup.criteria import (LABELS, check_structural, check_thm_neg, check_thm_pos,
                                 compare_conditions, kappa_threshold, mass_decay_bound,
                                 structural_margin, structural_margin_equivalent, xi)
from cgl_blowup.functionals import energy, mass
from cgl_blowup.ode import ode_blowup_time, ode_classify, ode_exact
from cgl_blowup.solver import StepControls, integrate_fixed, semigroup_apply, simulate

acceptance = pytest.mark.acceptance


def l2(grid, values):
    return math.sqrt(float(np.sum(np.abs(values) ** 2)) * grid.cell_volume)


@acceptance(1, "closed-form ODE solution vs adaptive integration")
def test_ode_closed_form_matches_integration():
    rng = np.random.default_rng(12345)
    m = 10_000
    theta = rng.uniform(-1.5, 1.5, m)
    alpha = 6.0 - rng.uniform(0.0, 6.0, m)  # (0, 6]
    gamma = rng.uniform(-2.0, 2.0, m)
    v0 = np.exp(rng.uniform(math.log(0.05), math.log(3.0), m)) * np.exp(2j * math.pi * rng.random(m))
    params = [Params(*args) for args in zip(theta, alpha, gamma)]
    horizon = np.array([min(5.0, 0.9 * ode_blowup_time(v, p)) for v, p in zip(v0, params)])
    s_eval = np.linspace(0.0, 1.0, 6)
    worst = 0.0
    # Rescaled time s = t / horizon puts every sample on [0, 1]; one vector system per chunk.
    for lo in range(0, m, 2000):
        sl = slice(lo, lo + 2000)
        phase, al, ga, span = np.exp(1j * theta[sl]), alpha[sl], gamma[sl], horizon[sl]

        def f(s, y):
            v = y.view(complex)
            return (span * (phase * np.abs(v) ** al * v + ga * v)).view(float)

        sol = solve_ivp(f, (0.0, 1.0), v0[sl].view(float).copy(), method="DOP853",
                        rtol=1e-13, atol=1e-300, t_eval=s_eval)
        assert sol.success
        numeric = sol.y.T.copy()
        for k, s in enumerate(s_eval):
            got = numeric[k].view(complex)
            exact = np.array([ode_exact(v, p, s * h)
                              for v, p, h in zip(v0[sl], params[sl], span)])
            worst = max(worst, float(np.max(np.abs(got - exact) / np.abs(exact))))
    assert worst <= 1e-8


@acceptance(2, "ODE classification flips at the damping threshold")
def test_ode_threshold_by_bisection():
    rng = np.random.default_rng(7)
    for _ in range(100):
        p = Params(rng.uniform(-1.5, 1.5), rng.uniform(0.05, 6.0), -rng.uniform(0.01, 2.0))
        phase = np.exp(2j * math.pi * rng.random())
        r_c = (-p.gamma / p.cos_theta) ** (1.0 / p.alpha)
        lo, hi = math.log(r_c) - 5.0, math.log(r_c) + 5.0
        assert not ode_classify(math.exp(lo) * phase, p).blows_up
        assert ode_classify(math.exp(hi) * phase, p).blows_up
        while hi - lo > 1e-14:
            mid = 0.5 * (lo + hi)
            if ode_classify(math.exp(mid) * phase, p).blows_up:
                hi = mid
            else:
                lo = mid
        assert abs(math.exp(0.5 * (lo + hi)) / r_c - 1.0) <= 1e-10


@acceptance(3, "constant initial data follow the ODE")
@pytest.mark.parametrize("p, v0", [
    (Params(0.3, 2.0, -0.5), 1.5),
    (Params(-0.4, 1.0, 0.0), 1.0 + 0.5j),
    (Params(0.2, 3.0, 0.7), 0.8),
])
def test_constant_field_matches_ode(p, v0):
    t_ode = ode_blowup_time(v0, p)
    out = simulate(constant(Grid(16.0, 16), v0), p,
                   StepControls(tol=1e-12, t_max=2.0 * t_ode), store_fields=True)
    assert out.blowup
    assert abs(out.t_star - t_ode) <= 0.02 * t_ode
    checked = 0
    for rec, u in zip(out.series, out.fields):
        if rec.t >= 0.9 * t_ode:
            break
        exact = ode_exact(v0, p, rec.t)
        assert np.max(np.abs(u.values - exact)) <= 1e-8 * abs(exact)
        checked += 1
    assert checked > 10


@acceptance(4, "linear flow is exact")
def test_linear_flow_heat_kernel():
    g = Grid(16.0, 256)
    p = Params(0.0, 2.0, 0.0)
    u0 = gaussian(g, 1.0, 1.0)
    for t in (0.1, 1.0):
        out = simulate(u0, p, StepControls(tol=1e-12, t_max=t), linear_only=True)
        assert out.t_final == pytest.approx(t, abs=1e-15)
        x = g.x
        exact = (1 + 2 * t) ** -0.5 * np.exp(-x ** 2 / (2 * (1 + 2 * t)))
        assert l2(g, out.final_field.values - exact) <= 1e-10


@acceptance(4, "linear flow is exact")
@pytest.mark.parametrize("theta", [-1.2, 0.0, 0.7])
def test_linear_semigroup_and_contraction(theta):
    g = Grid(8.0, 64)
    rng = np.random.default_rng(int(10 * theta) + 100)
    for seed in range(100):
        u = random_bandlimited(g, seed=seed, modes=12)
        s, t = rng.uniform(0.0, 0.5, 2)
        norm = l2(g, u.values)
        twice = semigroup_apply(semigroup_apply(u, s, theta), t, theta)
        once = semigroup_apply(u, s + t, theta)
        assert l2(g, twice.values - once.values) <= 1e-12 * norm
        assert l2(g, once.values) <= norm * (1 + 1e-12)


@acceptance(5, "negative-energy data with gamma > 0 blow up before the bound")
def test_positive_gamma_desk_run(pos_run):
    p, u0, out = pos_run
    e0 = 9 * math.sqrt(math.pi) / 4 - 81 * math.sqrt(math.pi / 2) / 4
    assert energy(u0, p.alpha) == pytest.approx(e0, rel=1e-10)
    assert e0 == pytest.approx(-21.39, abs=5e-3)
    t_bound = 9 * math.sqrt(math.pi) / (8 * math.cos(math.pi / 6) * -e0)
    rep = check_thm_pos(u0, p)
    assert rep.holds
    assert rep.extra["t_bound"] == pytest.approx(t_bound, rel=1e-10)
    assert out.blowup and out.t_star <= t_bound
    mon = M.monitor_pos(out.series, p)
    assert mon.passed, mon.text()
    assert np.all(mon.series["e_tilde"] < 0)


@acceptance(6, "structural-condition data with gamma < 0 blow up")
def test_negative_gamma_desk_run(neg_run):
    p, u0, out, k_star = neg_run
    assert check_structural(p).holds
    assert (p.alpha + 2) * math.cos(0.2) + 2 * (1 - math.cos(0.1)) >= 2 * math.cos(0.1)
    assert check_thm_neg(u0, p).holds
    assert out.blowup and math.isfinite(out.t_star)
    mon = M.monitor_neg(out.series, p)
    assert mon.passed, mon.text()
    assert np.all(mon.series["shifted_energy"] < 0)
    assert mon.series["zeta"] > 0


@acceptance(7, "small data decay under the mass majorant")
def test_small_data_decay(small_run):
    p, u0, out, est, thr = small_run
    assert thr.indicative
    assert math.sqrt(mass(u0)) == pytest.approx(0.5 * thr.value, rel=1e-12)
    assert out.kind == "Decayed" and out.t_final <= 50.0
    t = out.series.column("t")
    bound = mass_decay_bound(p, est, mass(u0), t)
    assert np.all(out.series.column("mass") <= bound * (1 + 1e-3))


def _subsampled(s):
    return TimeSeries(s.params, s.records[::2])


@acceptance(8, "mass and energy identities along the desk runs")
@pytest.mark.parametrize("run", ["pos_run", "neg_run", "small_run"])
def test_identity_residuals(run, request):
    p, _, out, *_ = request.getfixturevalue(run)
    s = out.series
    for check in (M.residual_mass_identity, M.residual_energy_identity):
        rep = check(s, p, tol=1e-4, sup_cutoff=1e3)
        assert rep.passed, rep.text()
        coarse = check(_subsampled(s), p, tol=1e-4, sup_cutoff=1e3)
        assert coarse.max_rel_residual >= 3.5 * rep.max_rel_residual


@acceptance(9, "condition algebra")
def test_structural_forms_agree_exactly():
    rng = np.random.default_rng(99)
    alpha = rng.uniform(1e-3, 10.0, 100_000)
    theta = rng.uniform(-math.pi / 2, math.pi / 2, 100_000)
    a = np.asarray(structural_margin(alpha, theta)) >= 0
    b = np.asarray(structural_margin_equivalent(alpha, theta)) >= 0
    assert np.array_equal(a, b)


@acceptance(9, "condition algebra")
def test_kappa_closed_form_vs_bisection():
    rng = np.random.default_rng(3)
    g = default_grid(1)
    for seed in range(100):
        psi = random_bandlimited(g, seed=seed, modes=int(rng.integers(2, 12)))
        p = Params(rng.uniform(-0.75, 0.75), rng.uniform(0.2, 4.0), -rng.uniform(0.01, 2.0))
        x = xi(p)

        def h(k):
            w = Field(g, k * psi.values)
            return energy(w, p.alpha) + x * mass(w)

        k_star = kappa_threshold(psi, p)
        hi = 1.0
        while h(hi) > 0:
            hi *= 2.0
        root = brentq(h, 1e-6 * hi, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
        assert abs(root / k_star - 1.0) <= 1e-10


@acceptance(9, "condition algebra")
def test_region_grid_has_all_classes():
    regions = compare_conditions((0.0, 10.0), (-math.pi / 4, math.pi / 4), 200)
    counts = regions.counts()
    assert set(counts) == set(LABELS)
    assert all(counts[name] > 0 for name in LABELS)


@acceptance(10, "fourth-order convergence and grid independence")
def test_convergence_order():
    p = Params(0.3, 2.0, -0.2)
    g = Grid(16.0, 128)
    u0 = gaussian(g, 1.0, 1.0)
    t_end = 0.5
    ref, _ = integrate_fixed(u0, p, t_end / 512, 512)
    errors = []
    for n in (16, 32, 64, 128):
        u, _ = integrate_fixed(u0, p, t_end / n, n)
        errors.append(l2(g, u.values - ref.values))
    ratios = [errors[i] / errors[i + 1] for i in range(len(errors) - 1)]
    assert all(12.0 <= r <= 20.0 for r in ratios), ratios
    fine, _ = integrate_fixed(gaussian(g.refine(), 1.0, 1.0), p, t_end / 128, 128)
    coarse, _ = integrate_fixed(u0, p, t_end / 128, 128)
    assert l2(g, fine.values[::2] - coarse.values) < 1e-8
