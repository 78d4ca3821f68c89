"""Closed-form hypotheses, thresholds and bounds of the blowup and global-existence results.

The blowup checkers state sufficient conditions only: a report either says
"blowup guaranteed" or "no conclusion", never "global".
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .core import Field, Params
from .functionals import GnEstimate, energy, grad_norm_sq, mass, power_integral

__all__ = [
    "CriterionReport",
    "structural_margin",
    "structural_margin_equivalent",
    "check_structural",
    "xi",
    "eta",
    "check_thm_neg",
    "check_thm_neg_values",
    "check_thm_pos",
    "check_mz",
    "mz_margin",
    "RegionGrid",
    "LABELS",
    "compare_conditions",
    "ThresholdReport",
    "global_threshold",
    "mass_decay_bound",
    "kappa_threshold",
]

GUARANTEED = "blowup guaranteed"
NO_CONCLUSION = "no conclusion"
BOUNDARY = "boundary - condition not strictly met"


@dataclass(frozen=True)
class CriterionReport:
    name: str
    holds: bool
    lhs: float
    rhs: float
    margin: float
    relation: str  # ">=", ">" or "<": how lhs must compare to rhs
    notes: str = ""
    extra: dict = field(default_factory=dict)

    def summary(self) -> str:
        parts = [f"{self.name}: {'holds' if self.holds else 'fails'}",
                 f"needs lhs {self.relation} rhs", f"lhs={self.lhs!r}", f"rhs={self.rhs!r}",
                 f"margin={self.margin!r}"]
        parts += [f"{k}={v!r}" for k, v in self.extra.items()]
        if self.notes:
            parts.append(f"[{self.notes}]")
        return "; ".join(parts)


def _report(name, lhs, rhs, relation, notes="", **extra) -> CriterionReport:
    if relation == ">=":
        margin = lhs - rhs
        ok = margin >= 0
    elif relation == ">":
        margin = lhs - rhs
        ok = margin > 0
    elif relation == "<":
        margin = lhs - rhs
        ok = margin < 0
    else:
        raise ValueError(relation)
    if relation in (">", "<") and margin == 0 and not notes:
        notes = BOUNDARY
    return CriterionReport(name, bool(ok), float(lhs), float(rhs), float(margin), relation,
                           notes, dict(extra))


def structural_margin(alpha, theta):
    """(alpha+2) cos(2 theta) + 2(1 - cos theta) - 2 cos theta; works on arrays."""
    c = np.cos(theta)
    return (alpha + 2.0) * np.cos(2.0 * theta) + 2.0 * (1.0 - c) - 2.0 * c


def structural_margin_equivalent(alpha, theta):
    """(alpha+2) cos^2 theta - alpha/2 - 2 cos theta, half the margin above."""
    c = np.cos(theta)
    return (alpha + 2.0) * c * c - 0.5 * alpha - 2.0 * c


def mz_margin(alpha, theta):
    c = np.cos(theta)
    return (alpha + 2.0) * c * c - 0.5 * (alpha + 3.0)


def check_structural(p: Params) -> CriterionReport:
    a, th = p.alpha, p.theta
    c = math.cos(th)
    lhs = (a + 2.0) * math.cos(2.0 * th) + 2.0 * (1.0 - c)
    rhs = 2.0 * c
    alt_lhs = (a + 2.0) * c * c
    alt_rhs = 0.5 * a + 2.0 * c
    holds, alt_holds = lhs >= rhs, alt_lhs >= alt_rhs
    notes = ""
    if holds != alt_holds:
        # Only possible within rounding of the boundary.
        notes = "equivalent forms disagree at rounding level; boundary case"
    return _report("structural condition", lhs, rhs, ">=", notes,
                   equivalent_lhs=alt_lhs, equivalent_rhs=alt_rhs,
                   equivalent_holds=bool(alt_holds))


def _xi_unchecked(p: Params) -> float:
    a, th = p.alpha, p.theta
    branch = 0.5 * ((a + 2.0) * math.cos(2.0 * th) + 2.0 * (1.0 - math.cos(th)))
    return -p.gamma / math.cos(th) * max(1.0 / a, branch)


def xi(p: Params) -> float:
    """Mass weight in the negative-gamma blowup condition E(u0) + xi ||u0||^2 < 0."""
    if not p.gamma < 0:
        raise ValueError("xi is defined for gamma < 0")
    if not abs(p.theta) < math.pi / 4:
        raise ValueError("xi is defined for |theta| < pi/4")
    return _xi_unchecked(p)


def eta(p: Params) -> float:
    """rho ((alpha+2) cos 2theta + 2(1 - cos theta)) / (2 cos theta), rho = -gamma."""
    rho = -p.gamma
    th = p.theta
    return rho * ((p.alpha + 2.0) * math.cos(2.0 * th) + 2.0 * (1.0 - math.cos(th))) / (
        2.0 * math.cos(th))


def check_thm_neg_values(e0: float, m0: float, p: Params) -> CriterionReport:
    """Negative-gamma blowup check from E(u0) and ||u0||^2 alone."""
    name = "shifted-energy blowup (gamma<0)"
    if not p.gamma < 0:
        raise ValueError("shifted-energy check needs gamma < 0")
    if not abs(p.theta) < math.pi / 4:
        nan = math.nan
        return CriterionReport(name, False, nan, nan, nan, "<",
                               f"inapplicable: |theta| >= pi/4; {NO_CONCLUSION}")
    st = check_structural(p)
    x = xi(p)
    lhs = e0 + x * m0
    rep = _report(name, lhs, 0.0, "<", xi=x, energy=e0, mass=m0, structural=st.holds)
    if not st.holds:
        return CriterionReport(name, False, rep.lhs, rep.rhs, rep.margin, "<",
                               f"structural condition fails; {NO_CONCLUSION}", rep.extra)
    notes = rep.notes or (GUARANTEED if rep.holds else NO_CONCLUSION)
    if rep.notes == BOUNDARY:
        notes = f"{BOUNDARY}; {NO_CONCLUSION}"
    return CriterionReport(name, rep.holds, rep.lhs, rep.rhs, rep.margin, "<", notes,
                           rep.extra)


def check_thm_neg(u0: Field, p: Params) -> CriterionReport:
    rep = check_thm_neg_values(energy(u0, p.alpha), mass(u0), p)
    if abs(p.theta) < math.pi / 4 and rep.extra.get("structural"):
        try:
            rep.extra["kappa_star"] = kappa_threshold(u0, p) if u0.sup_norm > 0 else math.inf
        except ValueError:
            pass
    return rep


def check_thm_pos(u0: Field, p: Params) -> CriterionReport:
    """gamma > 0, |theta| < pi/2 and E(u0) < 0 force blowup; adds the Tmax bound."""
    if not p.gamma > 0:
        raise ValueError("negative-energy check needs gamma > 0")
    name = "negative-energy blowup (gamma>0)"
    e0 = energy(u0, p.alpha)
    if not abs(p.theta) < math.pi / 2:
        nan = math.nan
        return CriterionReport(name, False, nan, nan, nan, "<",
                               f"inapplicable: |theta| >= pi/2; {NO_CONCLUSION}")
    rep = _report(name, e0, 0.0, "<")
    extra = {"energy": e0}
    if rep.holds:
        m0 = mass(u0)
        extra["t_bound"] = m0 / (p.alpha * (p.alpha + 2.0) * p.cos_theta * (-e0))
        notes = GUARANTEED
    elif rep.notes:
        notes = f"{rep.notes}; {NO_CONCLUSION}"
    else:
        notes = f"condition not met; {NO_CONCLUSION}"
    return CriterionReport(name, rep.holds, rep.lhs, rep.rhs, rep.margin, "<", notes, extra)


def check_mz(p: Params) -> CriterionReport:
    c = p.cos_theta
    return _report("cos-squared condition", (p.alpha + 2.0) * c * c, 0.5 * (p.alpha + 3.0), ">")


LABELS = ("both", "only-cos-squared", "only-structural", "neither")


@dataclass(frozen=True)
class RegionGrid:
    alphas: np.ndarray
    thetas: np.ndarray
    s_1_8: np.ndarray   # structural margin, shape (len(alphas), len(thetas))
    s_1_14: np.ndarray  # cos-squared margin
    labels: np.ndarray  # indices into LABELS

    def label_names(self) -> np.ndarray:
        return np.asarray(LABELS, dtype=object)[self.labels]

    def counts(self) -> dict[str, int]:
        return {name: int(np.sum(self.labels == i)) for i, name in enumerate(LABELS)}


def _centers(lo: float, hi: float, m: int) -> np.ndarray:
    return lo + (np.arange(m) + 0.5) * (hi - lo) / m


def _label(s18: np.ndarray, s114: np.ndarray) -> np.ndarray:
    h18 = s18 >= 0
    h114 = s114 > 0
    return np.where(h18 & h114, 0, np.where(h114, 1, np.where(h18, 2, 3)))


def compare_conditions(alpha_range, theta_range, resolution, workers: int | None = None
                       ) -> RegionGrid:
    """Classify cell centres by which of the cos-squared (strict) and structural (non-strict) conditions hold."""
    if isinstance(resolution, int):
        na = nt = resolution
    else:
        na, nt = resolution
    a0, a1 = map(float, alpha_range)
    t0, t1 = map(float, theta_range)
    if na < 1 or nt < 1:
        raise ValueError("resolution must be positive")
    if a1 < a0 or t1 < t0:
        raise ValueError("empty parameter range")
    if a0 < 0:
        raise ValueError("alpha range must be non-negative")
    alphas = _centers(a0, a1, na)
    thetas = _centers(t0, t1, nt)

    def row(a):
        return structural_margin_equivalent(a, thetas), mz_margin(a, thetas)

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            rows = list(ex.map(row, alphas))
    else:
        rows = [row(a) for a in alphas]
    s18 = np.array([r[0] for r in rows]).reshape(na, nt)
    s114 = np.array([r[1] for r in rows]).reshape(na, nt)
    return RegionGrid(alphas, thetas, s18, s114, _label(s18, s114))


@dataclass(frozen=True)
class ThresholdReport:
    value: float
    constant: float
    indicative: bool
    notes: str = ""


def _gn_pieces(p: Params, c: float):
    na = p.dim * p.alpha
    a = 2.0 * abs(p.gamma)
    b = p.cos_theta * c * (0.25 * na * c) ** (na / (4.0 - na)) * 0.5 * (4.0 - na)
    nu = 2.0 * p.alpha / (4.0 - na)
    return a, b, nu


def global_threshold(p: Params, c_gn) -> ThresholdReport:
    """L2 radius below which the solution is global, from the GN constant ``c_gn``.

    ``c_gn`` is a GnEstimate (result flagged indicative) or a user-supplied float.
    """
    if not p.gamma < 0:
        raise ValueError("global threshold needs gamma < 0")
    na = p.dim * p.alpha
    if not 0 < na < 4:
        raise ValueError("global threshold needs 0 < alpha < 4/dim")
    if isinstance(c_gn, GnEstimate):
        c, indicative = c_gn.constant, True
    else:
        c, indicative = float(c_gn), False
    if not c > 0:
        raise ValueError("GN constant must be positive")
    cos_t = p.cos_theta
    if cos_t <= 0:
        return ThresholdReport(math.inf, c, indicative, "cos theta = 0")
    base = 4.0 * abs(p.gamma) / ((4.0 - na) * (0.25 * na * c) ** (na / (4.0 - na)) * c * cos_t)
    value = base ** ((4.0 - na) / (4.0 * p.alpha))
    notes = "indicative (GN constant is a numerical lower estimate)" if indicative else ""
    return ThresholdReport(value, c, indicative, notes)


def mass_decay_bound(p: Params, c_gn, f0: float, t):
    """e^{-a t} (f0^{-nu} - b/a)^{-1/nu}, the mass majorant for small data."""
    c = c_gn.constant if isinstance(c_gn, GnEstimate) else float(c_gn)
    a, b, nu = _gn_pieces(p, c)
    gap = f0 ** (-nu) - b / a
    if not gap > 0:
        raise ValueError("initial mass above the small-data threshold")
    return np.exp(-a * np.asarray(t, dtype=float)) * gap ** (-1.0 / nu)


def kappa_threshold(psi: Field, p: Params) -> float:
    """Unique kappa* > 0 with E(kappa psi) + xi ||kappa psi||^2 = 0."""
    if psi.sup_norm == 0:
        raise ValueError("psi must be nonzero")
    x = _xi_unchecked(p) if p.gamma < 0 else 0.0
    g = grad_norm_sq(psi)
    m = mass(psi)
    q = power_integral(psi, p.alpha + 2.0)
    return ((p.alpha + 2.0) * (0.5 * g + x * m) / q) ** (1.0 / p.alpha)
