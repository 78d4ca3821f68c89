"""Shared domain types: parameters, periodic grid, complex fields, time series."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

__all__ = [
    "Params",
    "Violation",
    "validate_params",
    "ok_for",
    "Grid",
    "Field",
    "DiagnosticsRecord",
    "TimeSeries",
    "gaussian",
    "constant",
    "ring",
    "random_bandlimited",
    "default_grid",
]


@dataclass(frozen=True)
class Params:
    """Coefficients of u_t = e^{i theta}[Lap u + |u|^alpha u] + gamma u on R^dim."""

    theta: float
    alpha: float
    gamma: float
    dim: int = 1

    def __post_init__(self):
        if not (self.alpha > 0 and math.isfinite(self.alpha)):
            raise ValueError(f"alpha must be positive and finite, got {self.alpha}")
        if self.dim not in (1, 2, 3):
            raise ValueError(f"dim must be 1, 2 or 3, got {self.dim}")
        if not math.isfinite(self.gamma):
            raise ValueError("gamma must be finite")
        # |theta| = pi/2 is kept constructible for the ODE formulas; the solver
        # refuses it through validate_params.
        if not abs(self.theta) <= math.pi / 2 + 1e-15:
            raise ValueError(f"|theta| must not exceed pi/2, got {self.theta}")

    @property
    def cos_theta(self) -> float:
        return math.cos(self.theta)

    @property
    def phase(self) -> complex:
        return complex(math.cos(self.theta), math.sin(self.theta))


@dataclass(frozen=True)
class Violation:
    requirement: str  # "solver", "blowup_pos" or "blowup_neg"
    constraint: str
    message: str


def validate_params(p: Params) -> list[Violation]:
    """Return every structural constraint ``p`` violates, tagged by who needs it.

    The structural inequality of the gamma < 0 blowup check is not tested here; see
    :func:`cgl_blowup.criteria.check_structural`.
    """
    out = []
    if not abs(p.theta) < math.pi / 2:
        msg = f"|theta| = {abs(p.theta):.6g} is not < pi/2 (no parabolic smoothing)"
        out.append(Violation("solver", "|theta| < pi/2", msg))
        out.append(Violation("blowup_pos", "|theta| < pi/2", msg))
    if p.gamma <= 0:
        out.append(Violation("blowup_pos", "gamma > 0", f"gamma = {p.gamma:.6g} is not > 0"))
    if not abs(p.theta) < math.pi / 4:
        out.append(Violation("blowup_neg", "|theta| < pi/4",
                             f"|theta| = {abs(p.theta):.6g} is not < pi/4"))
    if p.gamma >= 0:
        out.append(Violation("blowup_neg", "gamma < 0", f"gamma = {p.gamma:.6g} is not < 0"))
    return out


def ok_for(p: Params, requirement: str) -> bool:
    return not any(v.requirement == requirement for v in validate_params(p))


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on the box [-L, L)^dim with n points per axis."""

    half_width: float
    n: int
    dim: int = 1

    def __post_init__(self):
        if self.n < 8 or self.n % 2:
            raise ValueError(f"points per dimension must be even and >= 8, got {self.n}")
        if not self.half_width > 0:
            raise ValueError("half_width must be positive")
        if self.dim not in (1, 2, 3):
            raise ValueError(f"dim must be 1, 2 or 3, got {self.dim}")

    @property
    def dx(self) -> float:
        return 2.0 * self.half_width / self.n

    @property
    def cell_volume(self) -> float:
        return self.dx ** self.dim

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.dim

    @property
    def size(self) -> int:
        return self.n ** self.dim

    @property
    def box_volume(self) -> float:
        return (2.0 * self.half_width) ** self.dim

    @property
    def x(self) -> np.ndarray:
        """1-D node coordinates -L + j dx."""
        return -self.half_width + self.dx * np.arange(self.n)

    def coords(self) -> tuple[np.ndarray, ...]:
        return tuple(np.meshgrid(*([self.x] * self.dim), indexing="ij"))

    def radius_sq(self) -> np.ndarray:
        return sum(c * c for c in self.coords())

    @property
    def k(self) -> np.ndarray:
        """1-D wavenumbers (pi/L) j in FFT order, j = 0..n/2-1, -n/2..-1."""
        return 2.0 * np.pi * np.fft.fftfreq(self.n, d=self.dx)

    def k_sq(self) -> np.ndarray:
        k2 = self.k ** 2
        return sum(np.meshgrid(*([k2] * self.dim), indexing="ij"))

    def refine(self, factor: int = 2) -> "Grid":
        return Grid(self.half_width, self.n * factor, self.dim)


def default_grid(dim: int = 1) -> Grid:
    if dim == 1:
        return Grid(16.0, 256, 1)
    if dim == 2:
        return Grid(12.0, 128, 2)
    return Grid(10.0, 64, 3)


@dataclass(frozen=True, eq=False)
class Field:
    """Physical-space samples of a complex field on ``grid``."""

    grid: Grid
    values: np.ndarray
    post_blowup: bool = False

    def __post_init__(self):
        v = np.array(self.values, dtype=np.complex128)
        if v.size != self.grid.size:
            raise ValueError(f"expected {self.grid.size} values, got {v.size}")
        v = v.reshape(self.grid.shape)
        if not self.post_blowup and not np.all(np.isfinite(v)):
            raise ValueError("field contains non-finite values")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    def with_values(self, values: np.ndarray) -> "Field":
        return Field(self.grid, values)

    def __mul__(self, c) -> "Field":
        return Field(self.grid, self.values * c)

    __rmul__ = __mul__

    @property
    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values))) if self.values.size else 0.0


def gaussian(grid: Grid, amplitude: complex = 1.0, width: float = 1.0,
             center: float | tuple[float, ...] = 0.0) -> Field:
    """amplitude * exp(-|x - center|^2 / (2 width^2))."""
    c = np.broadcast_to(np.asarray(center, dtype=float), (grid.dim,))
    r2 = sum((xi - ci) ** 2 for xi, ci in zip(grid.coords(), c))
    return Field(grid, amplitude * np.exp(-r2 / (2.0 * width ** 2)))


def constant(grid: Grid, value: complex) -> Field:
    return Field(grid, np.full(grid.shape, value, dtype=np.complex128))


def ring(grid: Grid, amplitude: complex = 1.0, radius: float = 3.0,
         width: float = 1.0) -> Field:
    """Radial bump amplitude * exp(-(|x| - radius)^2 / (2 width^2)); needs dim >= 2."""
    if grid.dim < 2:
        raise ValueError("ring initial data needs dim >= 2")
    r = np.sqrt(grid.radius_sq())
    return Field(grid, amplitude * np.exp(-((r - radius) ** 2) / (2.0 * width ** 2)))


def random_bandlimited(grid: Grid, seed: int = 0, modes: int = 8,
                       amplitude: float = 1.0) -> Field:
    """Random complex field whose Fourier support is |j| <= modes on every axis."""
    if not 0 < modes < grid.n // 2:
        raise ValueError("modes must lie in (0, n/2)")
    rng = np.random.default_rng(seed)
    coeff = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    j = np.fft.fftfreq(grid.n, d=1.0 / grid.n)
    mask = np.ones(grid.shape, dtype=bool)
    for axis in range(grid.dim):
        sl = [None] * grid.dim
        sl[axis] = slice(None)
        mask = mask & (np.abs(j)[tuple(sl)] <= modes)
    values = np.fft.ifftn(np.where(mask, coeff, 0.0))
    scale = np.max(np.abs(values))
    return Field(grid, amplitude * values / scale)


@dataclass(frozen=True)
class DiagnosticsRecord:
    t: float
    mass: float
    energy: float
    variational: float
    grad_sq: float
    sup_norm: float
    ut_sq: float
    inner_uut: complex


SERIES_COLUMNS = ("t", "mass", "energy", "variational", "grad_sq", "sup_norm",
                  "ut_sq", "re_inner", "im_inner")


@dataclass
class TimeSeries:
    params: Params
    records: list[DiagnosticsRecord] = field(default_factory=list)

    def append(self, rec: DiagnosticsRecord) -> None:
        if self.records and not rec.t > self.records[-1].t:
            raise ValueError(f"time stamps must increase: {rec.t} after {self.records[-1].t}")
        self.records.append(rec)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[DiagnosticsRecord]:
        return iter(self.records)

    def column(self, name: str) -> np.ndarray:
        if name == "re_inner":
            return np.array([r.inner_uut.real for r in self.records])
        if name == "im_inner":
            return np.array([r.inner_uut.imag for r in self.records])
        if name == "inner_uut":
            return np.array([r.inner_uut for r in self.records], dtype=complex)
        return np.array([getattr(r, name) for r in self.records], dtype=float)

    def truncated(self, sup_below: float) -> "TimeSeries":
        """Leading records whose sup norm stays below ``sup_below``."""
        out = TimeSeries(self.params)
        for r in self.records:
            if r.sup_norm >= sup_below:
                break
            out.records.append(r)
        return out
