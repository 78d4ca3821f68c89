"""Trajectory monitors: energy-identity residuals and the convexity quantities of the blowup proofs.

Time derivatives are centred differences between consecutive records; the
matching right-hand sides are averaged over the two records, so both sides are
second-order approximations at the interval midpoint.  Monitors never stop a
run; intervals where the sup norm exceeds ``sup_cutoff`` are reported as
near-singular and excluded from the pass/fail decision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import Params, TimeSeries
from .criteria import check_thm_neg_values, eta

__all__ = [
    "MonitorReport",
    "HypothesisError",
    "residual_mass_identity",
    "residual_energy_identity",
    "monitor_pos",
    "monitor_neg",
    "MONITORS",
]

NEAR_SINGULAR = "near-singularity, expected degradation"
EPS = 1e-300


class HypothesisError(ValueError):
    """Raised when a monitor's regime or blowup hypotheses do not hold."""


@dataclass
class MonitorReport:
    name: str
    max_rel_residual: float
    violations: list = field(default_factory=list)
    tolerance: float = 1e-4
    degraded: list = field(default_factory=list)
    notes: str = ""
    series: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.max_rel_residual <= self.tolerance and not self.violations

    def text(self) -> str:
        lines = [f"monitor: {self.name}",
                 f"passed: {self.passed}",
                 f"tolerance: {self.tolerance!r}",
                 f"max_rel_residual: {self.max_rel_residual!r}",
                 f"violations: {len(self.violations)}"]
        lines += [f"  t={t!r}: {d}" for t, d in self.violations]
        if self.degraded:
            lines.append(f"near-singular intervals ({NEAR_SINGULAR}): {len(self.degraded)}")
        if self.notes:
            lines.append(f"notes: {self.notes}")
        return "\n".join(lines) + "\n"


class _Arrays:
    def __init__(self, s: TimeSeries):
        self.t = s.column("t")
        self.mass = s.column("mass")
        self.energy = s.column("energy")
        self.var = s.column("variational")
        self.grad = s.column("grad_sq")
        self.sup = s.column("sup_norm")
        self.ut_sq = s.column("ut_sq")
        self.inner = s.column("inner_uut")

    def fd(self, y):
        return np.diff(y) / np.diff(self.t)

    @staticmethod
    def avg(y):
        return 0.5 * (y[1:] + y[:-1])

    def t_mid(self):
        return self.avg(self.t)


def _need(s: TimeSeries, k: int = 3):
    if len(s) < k:
        raise ValueError(f"monitor needs at least {k} records, got {len(s)}")


def _split(a: _Arrays, sup_cutoff: float):
    """Boolean mask of intervals below the cutoff at both ends."""
    return np.maximum(a.sup[1:], a.sup[:-1]) < sup_cutoff


def _residual_check(a, lhs, rhs, scale, tol, sup_cutoff, label):
    res = np.abs(lhs - rhs) / (scale + EPS)
    ok = _split(a, sup_cutoff)
    tm = a.t_mid()
    max_res = float(np.max(res[ok])) if np.any(ok) else 0.0
    viol = [(float(t), f"{label} residual {r:.3e}") for t, r, m in zip(tm, res, ok)
            if m and r > tol]
    degraded = [(float(t), f"{label} residual {r:.3e}") for t, r, m in zip(tm, res, ok)
                if not m and r > tol]
    return max_res, viol, degraded, res


def residual_mass_identity(s: TimeSeries, p: Params, tol: float = 1e-4,
                           sup_cutoff: float = 1e3) -> MonitorReport:
    """d/dt ||u||^2 = 2 gamma ||u||^2 - 2 cos(theta) I(u)."""
    _need(s)
    a = _Arrays(s)
    c = p.cos_theta
    rhs = 2.0 * p.gamma * a.mass - 2.0 * c * a.var
    scale = np.abs(2.0 * p.gamma * a.mass) + np.abs(2.0 * c * a.var)
    max_res, viol, deg, res = _residual_check(
        a, a.fd(a.mass), a.avg(rhs), a.avg(scale), tol, sup_cutoff, "mass identity")
    return MonitorReport("mass_identity", max_res, viol, tol, deg,
                         series={"t_mid": a.t_mid(), "residual": res})


def residual_energy_identity(s: TimeSeries, p: Params, tol: float = 1e-4,
                             sup_cutoff: float = 1e3) -> MonitorReport:
    """dE/dt identity, the shifted-energy identity, and Im <u, u_t> = -sin(theta) I."""
    _need(s)
    a = _Arrays(s)
    if not (np.all(np.isfinite(a.ut_sq)) and np.all(np.isfinite(a.inner))):
        raise ValueError("records lack u_t diagnostics")
    c, sn, g = p.cos_theta, math.sin(p.theta), p.gamma
    c2 = math.cos(2.0 * p.theta)

    t1 = -c * a.ut_sq
    t2 = g * g * c * a.mass
    t3 = -g * c2 * a.var
    rhs1 = t1 + t2 + t3
    scale1 = np.abs(t1) + np.abs(t2) + np.abs(t3)
    r1, v1, d1, res1 = _residual_check(a, a.fd(a.energy), a.avg(rhs1), a.avg(scale1),
                                       tol, sup_cutoff, "dE/dt identity")

    shifted = a.energy - 0.5 * g * c * a.mass
    s3 = g * sn * sn * a.var
    rhs2 = t1 + s3
    scale2 = np.abs(t1) + np.abs(s3)
    r2, v2, d2, res2 = _residual_check(a, a.fd(shifted), a.avg(rhs2), a.avg(scale2),
                                       tol, sup_cutoff, "shifted-energy identity")

    # Pointwise identity, no differencing.
    if sn == 0.0:
        im_res = np.abs(a.inner.imag) / (np.abs(a.inner) + EPS)
    else:
        im_res = np.abs(a.inner.imag + sn * a.var) / (np.abs(a.inner.imag)
                                                      + np.abs(sn * a.var) + EPS)
    pt_ok = a.sup < sup_cutoff
    r3 = float(np.max(im_res[pt_ok])) if np.any(pt_ok) else 0.0
    v3 = [(float(t), f"Im identity residual {r:.3e}") for t, r, m in zip(a.t, im_res, pt_ok)
          if m and r > tol]

    notes = ""
    viol = v1 + v2 + v3
    if g == 0.0:
        # dE/dt = -cos(theta) ||u_t||^2 <= 0: energy must not increase.
        e = a.energy
        ok = _split(a, sup_cutoff)
        jumps = np.diff(e)
        tol_abs = tol * (np.abs(e[1:]) + np.abs(e[:-1]))
        bad = ok & (jumps > tol_abs)
        viol += [(float(t), f"energy increased by {j:.3e}") for t, j in
                 zip(a.t[1:][bad], jumps[bad])]
        notes = "gamma = 0: energy checked non-increasing"
    return MonitorReport("energy_identity", max(r1, r2, r3), viol, tol, d1 + d2, notes,
                         series={"t_mid": a.t_mid(), "dE_residual": res1,
                                 "shifted_residual": res2, "im_residual": im_res})


def _shortfall(lhs, rhs):
    """Relative amount by which lhs >= rhs is violated (0 when satisfied)."""
    return np.maximum(rhs - lhs, 0.0) / (np.abs(lhs) + np.abs(rhs) + EPS)


class _Checks:
    """Accumulates inequality checks, separating near-singular points."""

    def __init__(self, tol):
        self.tol = tol
        self.violations = []
        self.degraded = []
        self.worst = 0.0

    def add(self, ts, res, mask, label):
        for t, r, m in zip(ts, res, mask):
            if r > self.tol:
                entry = (float(t), f"{label}, relative {r:.3e}")
                (self.violations if m else self.degraded).append(entry)
        if np.any(mask):
            self.worst = max(self.worst, float(np.max(res[mask])))

    def sign(self, ts, ok, label):
        self.violations += [(float(t), label) for t, good in zip(ts, ok) if not good]


def monitor_pos(s: TimeSeries, p: Params, tol: float = 1e-3,
                sup_cutoff: float = 1e3) -> MonitorReport:
    """Rescaled quantities for gamma > 0 and negative initial energy."""
    if not p.gamma > 0:
        raise HypothesisError("monitor_pos needs gamma > 0")
    _need(s, 2)
    a = _Arrays(s)
    e0, f0 = float(a.energy[0]), float(a.mass[0])
    if not e0 < 0:
        raise HypothesisError("blowup hypotheses not met: E(u0) >= 0")
    alpha, c, g = p.alpha, p.cos_theta, p.gamma
    w = np.exp(-2.0 * g * a.t)
    ft, et, jt = w * a.mass, w * a.energy, w * a.var
    q = -et * ft ** (-(alpha + 2.0) / 2.0)
    pt, iv = a.sup < sup_cutoff, _split(a, sup_cutoff)
    ck = _Checks(tol)
    ck.sign(a.t, et < 0, "rescaled energy not negative")
    ck.add(a.t_mid(), _shortfall(q[1:], q[:-1]), iv, "monotone quantity decreased")
    k = 2.0 * (alpha + 2.0) * c * (-e0) * f0 ** (-(alpha + 2.0) / 2.0)
    lower = k * a.avg(ft ** ((alpha + 2.0) / 2.0))
    ck.add(a.t_mid(), _shortfall(a.fd(ft), lower), iv, "rescaled mass growth below bound")
    # Separable solution of the growth bound with the same initial value.
    base = f0 ** (-alpha / 2.0) - 0.5 * alpha * k * a.t
    minorant = np.where(base > 0, np.abs(base) ** (-2.0 / alpha), np.inf)
    ck.add(a.t, _shortfall(ft, minorant), pt, "rescaled mass below separable minorant")
    t_bound = f0 / (alpha * (alpha + 2.0) * c * (-e0))
    return MonitorReport("pos", ck.worst, ck.violations, tol, ck.degraded,
                         notes=f"Tmax bound {t_bound!r}",
                         series={"t": a.t, "f_tilde": ft, "e_tilde": et, "j_tilde": jt,
                                 "monotone": q, "minorant": minorant, "t_bound": t_bound})


def monitor_neg(s: TimeSeries, p: Params, tol: float = 1e-3,
                sup_cutoff: float = 1e3) -> MonitorReport:
    """Shifted energy, zeta and the superlinear mass inequality for gamma < 0."""
    if not p.gamma < 0:
        raise HypothesisError("monitor_neg needs gamma < 0")
    _need(s, 2)
    a = _Arrays(s)
    e0, f0 = float(a.energy[0]), float(a.mass[0])
    rep = check_thm_neg_values(e0, f0, p)
    if not rep.holds:
        raise HypothesisError(f"blowup hypotheses not met: {rep.notes}")
    alpha, c = p.alpha, p.cos_theta
    rho = -p.gamma
    et_a = eta(p)
    shifted = a.energy + et_a * a.mass
    pt, iv = a.sup < sup_cutoff, _split(a, sup_cutoff)
    ck = _Checks(tol)
    ck.sign(a.t, shifted < 0, "shifted energy not negative")
    ck.sign(a.t, a.energy <= shifted, "energy above shifted energy")
    bound = np.exp(rho * (alpha + 2.0) * math.cos(2.0 * p.theta) * a.t) * shifted[0]
    ck.add(a.t, _shortfall(bound, shifted), pt, "shifted energy above exponential bound")
    zeta = -f0 ** (-(alpha + 2.0) / 2.0) * e0 - rho / (alpha * c) * f0 ** (-alpha / 2.0)
    if not zeta > 0:
        ck.violations.append((float(a.t[0]), f"zeta = {zeta!r} not positive"))
    integ = (-a.mass ** (-(alpha + 2.0) / 2.0) * a.energy
             - rho / (alpha * c) * a.mass ** (-alpha / 2.0))
    ck.add(a.t, _shortfall(integ, np.full_like(integ, zeta)), pt,
           "integrated inequality below zeta")
    lower = 2.0 * (alpha + 2.0) * c * zeta * a.avg(a.mass ** ((alpha + 2.0) / 2.0))
    ck.add(a.t_mid(), _shortfall(a.fd(a.mass), lower), iv, "mass growth below superlinear bound")
    return MonitorReport("neg", ck.worst, ck.violations, tol, ck.degraded,
                         notes=f"zeta {zeta!r}, eta {et_a!r}",
                         series={"t": a.t, "shifted_energy": shifted, "integrated": integ,
                                 "zeta": zeta, "eta": et_a, "rho": rho})


MONITORS = {
    "mass": residual_mass_identity,
    "energy": residual_energy_identity,
    "pos": monitor_pos,
    "neg": monitor_neg,
}
