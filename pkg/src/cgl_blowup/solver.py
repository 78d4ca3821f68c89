"""Pseudo-spectral ETDRK4 time stepping with step-doubling control and blowup detection.

The linear part e^{i theta} Lap is diagonal in Fourier space and is integrated
exactly; N(u) = e^{i theta} |u|^alpha u + gamma u (the power dealiased by 2x
zero-padding) is handled by the Cox-Matthews fourth-order scheme.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels, spectral
from .core import DiagnosticsRecord, Field, Grid, Params, TimeSeries, ok_for

__all__ = [
    "StepControls",
    "SimOutcome",
    "semigroup_apply",
    "rhs",
    "step",
    "simulate",
    "integrate_fixed",
    "phi_functions",
    "ETDStepper",
    "diagnostics",
]


def phi_functions(z: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """phi_1, phi_2, phi_3 of complex z, phi_k(z) = sum_j z^j / (j + k)!."""
    z = np.asarray(z, dtype=np.complex128)
    small = np.abs(z) < 1.0
    phi1 = np.empty_like(z)
    phi2 = np.empty_like(z)
    phi3 = np.empty_like(z)
    zs = z[small]
    # Taylor branch: 25 terms leave a remainder below 1e-25 for |z| < 1.
    c1 = np.zeros_like(zs)
    c2 = np.zeros_like(zs)
    c3 = np.zeros_like(zs)
    for j in range(25, -1, -1):
        c1 = c1 * zs + 1.0 / math.factorial(j + 1)
        c2 = c2 * zs + 1.0 / math.factorial(j + 2)
        c3 = c3 * zs + 1.0 / math.factorial(j + 3)
    phi1[small], phi2[small], phi3[small] = c1, c2, c3
    zl = z[~small]
    p1 = np.expm1(zl) / zl
    p2 = (p1 - 1.0) / zl
    phi1[~small], phi2[~small], phi3[~small] = p1, p2, (p2 - 0.5) / zl
    return phi1, phi2, phi3


@dataclass(frozen=True)
class StepControls:
    dt_init: float = 1e-3
    dt_min: float = 1e-14
    safety: float = 0.9
    tol: float = 1e-9
    sup_blowup_threshold: float = 1e6
    t_max: float = 1.0
    record_every: int = 1
    dt_max: float = math.inf
    decay_level: float = 1e-8
    max_steps: int = 2_000_000
    # Upper bound on dt * cos(theta) * sup^alpha, the relative sup growth per step.
    growth_cap: float = 0.9

    def __post_init__(self):
        if not 0 < self.dt_min <= self.dt_init:
            raise ValueError("need 0 < dt_min <= dt_init")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if not self.sup_blowup_threshold > 1:
            raise ValueError("sup_blowup_threshold must exceed 1")
        if not 0 < self.safety < 1:
            raise ValueError("safety must lie in (0, 1)")
        if not self.growth_cap > 0:
            raise ValueError("growth_cap must be positive")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")
        if not self.t_max > 0:
            raise ValueError("t_max must be positive")


@dataclass
class SimOutcome:
    kind: str  # "BlowupDetected", "ReachedHorizon", "Decayed" or "StepLimit"
    series: TimeSeries
    t_final: float
    sup_norm_final: float
    t_star: float = math.nan
    decay_level: float = math.nan
    last_dt: float = math.nan
    accepted_steps: int = 0
    rejected_steps: int = 0
    final_field: Field | None = None
    fields: list = field(default_factory=list)

    @property
    def blowup(self) -> bool:
        return self.kind == "BlowupDetected"

    def describe(self) -> str:
        if self.kind == "BlowupDetected":
            return f"BlowupDetected t*={self.t_star!r} sup_norm={self.sup_norm_final!r}"
        if self.kind == "Decayed":
            return f"Decayed below={self.decay_level!r} at t={self.t_final!r}"
        return f"{self.kind} t={self.t_final!r}"


def semigroup_apply(u: Field, t: float, theta: float) -> Field:
    """Exact flow of w_t = e^{i theta} Lap w: multiply modes by exp(-e^{i theta}|k|^2 t)."""
    if t < 0:
        raise ValueError("semigroup time must be non-negative")
    if not abs(theta) < math.pi / 2:
        raise ValueError("semigroup needs |theta| < pi/2")
    mult = np.exp(-complex(math.cos(theta), math.sin(theta)) * spectral.k_sq(u.grid) * t)
    return Field(u.grid, spectral.ifft(mult * spectral.fft(u.values)))


class ETDStepper:
    """ETDRK4 on Fourier coefficients for fixed (grid, params)."""

    def __init__(self, grid: Grid, p: Params, linear_only: bool = False):
        self.grid = grid
        self.p = p
        self.linear_only = linear_only
        self.lin = -p.phase * spectral.k_sq(grid)
        if linear_only:
            # gamma u is linear too; keeping it in the exponential makes the flow exact.
            self.lin = self.lin + p.gamma
        self._coeffs: dict[float, tuple] = {}

    def nonlinear_hat(self, vh: np.ndarray) -> np.ndarray:
        if self.linear_only:
            return np.zeros_like(vh)
        p = self.p
        return p.phase * spectral.dealiased_power_hat(self.grid, vh, p.alpha) + p.gamma * vh

    def time_derivative_hat(self, vh: np.ndarray) -> np.ndarray:
        return self.lin * vh + self.nonlinear_hat(vh)

    def coefficients(self, dt: float):
        c = self._coeffs.get(dt)
        if c is None:
            if len(self._coeffs) > 96:
                self._coeffs.clear()
            z = dt * self.lin
            e = np.exp(z)
            e2 = np.exp(0.5 * z)
            h1, _, _ = phi_functions(0.5 * z)
            p1, p2, p3 = phi_functions(z)
            q = 0.5 * dt * h1
            f1 = dt * (p1 - 3.0 * p2 + 4.0 * p3)
            f2 = dt * (p2 - 2.0 * p3)
            f3 = dt * (4.0 * p3 - p2)
            c = (e, e2, q, f1, f2, f3)
            self._coeffs[dt] = c
        return c

    def etdrk4(self, vh: np.ndarray, dt: float, nv: np.ndarray | None = None) -> np.ndarray:
        e, e2, q, f1, f2, f3 = self.coefficients(dt)
        if nv is None:
            nv = self.nonlinear_hat(vh)
        a = e2 * vh + q * nv
        na = self.nonlinear_hat(a)
        b = e2 * vh + q * na
        nb = self.nonlinear_hat(b)
        c = e2 * a + q * (2.0 * nb - nv)
        nc = self.nonlinear_hat(c)
        return e * vh + f1 * nv + 2.0 * f2 * (na + nb) + f3 * nc

    def step_doubled(self, vh: np.ndarray, dt: float) -> tuple[np.ndarray, float]:
        """Two dt/2 steps plus the L2 distance to the single dt step."""
        with np.errstate(over="ignore", invalid="ignore"):
            nv = self.nonlinear_hat(vh)
            coarse = self.etdrk4(vh, dt, nv)
            half = self.etdrk4(vh, 0.5 * dt, nv)
            fine = self.etdrk4(half, 0.5 * dt)
            if not (np.all(np.isfinite(fine)) and np.all(np.isfinite(coarse))):
                return fine, math.inf
            err = math.sqrt(spectral.spectral_mass(self.grid, fine - coarse))
        return fine, err


LADDER_PER_OCTAVE = 8


def quantize_dt(dt: float) -> float:
    """Largest value 2^(m/8) not above dt, so ETDRK4 coefficients get reused."""
    m = math.floor(LADDER_PER_OCTAVE * math.log2(dt) + 1e-9)
    return 2.0 ** (m / LADDER_PER_OCTAVE)


def rhs(u: Field, p: Params, linear_only: bool = False) -> Field:
    """u_t = e^{i theta}(Lap u + dealiased |u|^alpha u) + gamma u."""
    st = ETDStepper(u.grid, p, linear_only)
    return Field(u.grid, spectral.ifft(st.time_derivative_hat(spectral.fft(u.values))))


def step(u: Field, dt: float, p: Params, linear_only: bool = False) -> tuple[Field, float]:
    """One step-doubled ETDRK4 step; returns the dt/2 + dt/2 result and the error estimate.

    Overflow is reported as an infinite error with a field flagged post-blowup.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    st = ETDStepper(u.grid, p, linear_only)
    out, err = st.step_doubled(spectral.fft(u.values), dt)
    vals = spectral.ifft(out)
    if not math.isfinite(err):
        return Field(u.grid, vals, post_blowup=True), err
    return Field(u.grid, vals), err


def integrate_fixed(u0: Field, p: Params, dt: float, steps: int,
                    linear_only: bool = False) -> tuple[Field, float]:
    """Fixed-step ETDRK4 (no doubling); also returns the summed step-doubling error."""
    st = ETDStepper(u0.grid, p, linear_only)
    vh = spectral.fft(u0.values)
    total = 0.0
    for _ in range(steps):
        nv = st.nonlinear_hat(vh)
        coarse = st.etdrk4(vh, dt, nv)
        fine = st.etdrk4(st.etdrk4(vh, 0.5 * dt, nv), 0.5 * dt)
        total += math.sqrt(spectral.spectral_mass(u0.grid, fine - coarse))
        vh = coarse
    return Field(u0.grid, spectral.ifft(vh)), total


def diagnostics(st: ETDStepper, t: float, vh: np.ndarray, values: np.ndarray) -> DiagnosticsRecord:
    g = st.grid
    dv = g.cell_volume
    alpha = st.p.alpha
    grad_sq = float(np.sum(spectral.k_sq(g) * np.abs(vh) ** 2)) * dv / g.size
    mass = _kernels.power_sum(values, 2.0) * dv
    # |u|^{alpha+2} integrated on the padded grid the dealiased nonlinearity
    # lives on; this keeps the discrete energy identities exact.
    if st.linear_only:
        pint = 0.0  # functionals of the equation without its power term
    else:
        fine = spectral.ifft(spectral.pad(g, vh))
        pint = _kernels.power_sum(fine, alpha + 2.0) * dv / spectral.PAD_FACTOR ** g.dim
    ut = spectral.ifft(st.time_derivative_hat(vh))
    return DiagnosticsRecord(
        t=float(t),
        mass=mass,
        energy=0.5 * grad_sq - pint / (alpha + 2.0),
        variational=grad_sq - pint,
        grad_sq=grad_sq,
        sup_norm=float(np.max(np.abs(values))),
        ut_sq=_kernels.power_sum(ut, 2.0) * dv,
        inner_uut=complex(np.sum(np.conj(values) * ut)) * dv,
    )


def simulate(u0: Field, p: Params, c: StepControls, linear_only: bool = False,
             store_fields: bool = False) -> SimOutcome:
    """Adaptive integration until blowup, decay or the horizon c.t_max."""
    if not ok_for(p, "solver"):
        raise ValueError("solver requires |theta| < pi/2")
    grid = u0.grid
    if grid.dim != p.dim:
        raise ValueError("grid dimension does not match params.dim")
    st = ETDStepper(grid, p, linear_only)
    vh = spectral.fft(u0.values)
    values = u0.values
    series = TimeSeries(p)
    fields = []
    cos_t = p.cos_theta

    def record(t_now):
        series.append(diagnostics(st, t_now, vh, values))
        if store_fields:
            fields.append(Field(grid, values))

    t = 0.0
    record(t)
    sup = float(np.max(np.abs(values)))
    done = dict(series=series, fields=fields)
    if sup < c.decay_level:
        return SimOutcome("Decayed", t_final=t, sup_norm_final=sup, decay_level=c.decay_level,
                          final_field=u0, **done)
    dt = c.dt_init
    accepted = rejected = 0
    last_dt = math.nan
    floor = c.dt_min * (1.0 + 1e-9)
    kind = None
    t_star = math.nan
    while kind is None:
        if accepted + rejected >= c.max_steps:
            kind = "StepLimit"
            break
        remaining = c.t_max - t
        if sup >= c.sup_blowup_threshold:
            dt_try = c.dt_min
        else:
            dt_try = min(dt, c.dt_max)
            if not linear_only and sup > 0:
                dt_try = min(dt_try, c.growth_cap / (cos_t * sup ** p.alpha))
            dt_try = quantize_dt(dt_try)
            if dt_try >= remaining:
                dt_try = remaining
            dt_try = max(dt_try, min(c.dt_min, remaining))
        new, err = st.step_doubled(vh, dt_try)
        at_floor = dt_try <= floor
        scale = c.tol * (1.0 + math.sqrt(spectral.spectral_mass(grid, vh)))
        if not math.isfinite(err):
            if at_floor:
                # Singular within one floor step: the last finite state stands.
                last_dt = dt_try
                kind = "BlowupDetected"
                t_star = t + 1.0 / (p.alpha * cos_t * sup ** p.alpha)
                break
            rejected += 1
            dt = max(0.25 * dt_try, c.dt_min)
            continue
        if err > scale and not at_floor:
            rejected += 1
            dt = max(dt_try * max(0.1, c.safety * (scale / err) ** 0.2), c.dt_min)
            continue
        t += dt_try
        vh = new
        values = spectral.ifft(vh)
        accepted += 1
        last_dt = dt_try
        sup = float(np.max(np.abs(values)))
        grow = 2.0 if err == 0 else min(2.0, max(0.2, c.safety * (scale / err) ** 0.2))
        dt = max(dt_try * grow, c.dt_min)
        if sup >= c.sup_blowup_threshold and last_dt <= floor:
            kind = "BlowupDetected"
            t_star = t + 1.0 / (p.alpha * cos_t * sup ** p.alpha)
        elif sup < c.decay_level:
            kind = "Decayed"
        elif t >= c.t_max * (1.0 - 1e-14) or remaining - dt_try <= 0:
            kind = "ReachedHorizon"
        if accepted % c.record_every == 0:
            record(t)
    if series.records[-1].t < t:
        record(t)
    final = Field(grid, values, post_blowup=not np.all(np.isfinite(values)))
    return SimOutcome(kind, t_final=t, sup_norm_final=sup, t_star=t_star,
                      decay_level=c.decay_level if kind == "Decayed" else math.nan,
                      last_dt=last_dt, accepted_steps=accepted, rejected_steps=rejected,
                      final_field=final, **done)
