"""Spatially homogeneous dynamics v' = e^{i theta}|v|^alpha v + gamma v.

The closed form is

    v(t) = e^{gamma t} [1 - ((e^{alpha gamma t} - 1)/gamma) |v0|^alpha cos(theta)]
           ^{-(1 + i tan theta)/alpha} v0,

with (e^{alpha gamma t} - 1)/gamma read as alpha t when gamma = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Params

__all__ = ["OdeVerdict", "ode_exact", "ode_blowup_time", "ode_classify", "ode_rhs"]

BOUNDARY_RTOL = 1e-12


@dataclass(frozen=True)
class OdeVerdict:
    kind: str  # "BlowsUp" or "Global"
    t_star: float = math.inf
    boundary: bool = False
    zero: bool = False

    def __post_init__(self):
        if self.kind == "BlowsUp" and not self.t_star > 0:
            raise ValueError("blowup time must be positive")

    @property
    def blows_up(self) -> bool:
        return self.kind == "BlowsUp"

    def __str__(self) -> str:
        if self.blows_up:
            return f"BlowsUp t*={self.t_star!r}"
        if self.zero:
            return "Global (zero)"
        if self.boundary:
            return "Global (boundary)"
        return "Global"


def _growth_factor(alpha: float, gamma: float, t):
    """(e^{alpha gamma t} - 1) / gamma, continuous through gamma = 0."""
    if gamma == 0.0:
        return alpha * np.asarray(t, dtype=float)
    return np.expm1(alpha * gamma * np.asarray(t, dtype=float)) / gamma


def ode_rhs(v, p: Params):
    v = np.asarray(v, dtype=complex)
    return p.phase * np.abs(v) ** p.alpha * v + p.gamma * v


def ode_exact(v0: complex, p: Params, t):
    """Closed-form solution at time(s) ``t``; raises ValueError outside [0, t*)."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise ValueError("t must be non-negative")
    v0 = complex(v0)
    if v0 == 0:
        return np.zeros_like(t_arr, dtype=complex)[()]
    b = abs(v0) ** p.alpha * p.cos_theta
    drop = _growth_factor(p.alpha, p.gamma, t_arr) * b
    if np.any(drop >= 1.0):
        raise ValueError("t is at or beyond the blowup time")
    # Real positive base: base**z = exp(z * ln base), no branch choice involved.
    expo = -(1.0 + 1j * math.tan(p.theta)) / p.alpha
    out = np.exp(p.gamma * t_arr + expo * np.log1p(-drop)) * v0
    return out[()]


def ode_blowup_time(v0: complex, p: Params) -> float:
    """First zero of the bracket in the closed form, or inf."""
    c = p.cos_theta
    if v0 == 0 or c <= 0:
        return math.inf
    b = abs(v0) ** p.alpha * c
    a, g = p.alpha, p.gamma
    if g == 0.0:
        return 1.0 / (a * b)
    ratio = g / b
    if not 1.0 + ratio > 0:
        return math.inf
    t = math.log1p(ratio) / (a * g)
    if not t > 0 or not math.isfinite(t):
        return math.inf
    return t


def ode_classify(v0: complex, p: Params) -> OdeVerdict:
    if v0 == 0:
        return OdeVerdict("Global", zero=True)
    t_star = ode_blowup_time(v0, p)
    boundary = False
    if p.gamma < 0:
        b = abs(v0) ** p.alpha * p.cos_theta
        boundary = abs(b + p.gamma) <= BOUNDARY_RTOL * abs(p.gamma)
    if math.isfinite(t_star):
        return OdeVerdict("BlowsUp", t_star=t_star, boundary=boundary)
    return OdeVerdict("Global", boundary=boundary)
