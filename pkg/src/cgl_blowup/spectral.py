"""FFT plumbing on the periodic grid: transforms, Laplacian, 2x zero-padding."""

from __future__ import annotations

from functools import lru_cache

import numpy as np
import scipy.fft as sfft

from . import _kernels
from .core import Grid

PAD_FACTOR = 2


def fft(values: np.ndarray) -> np.ndarray:
    if values.ndim == 1:
        return sfft.fft(values)
    return sfft.fftn(values)


def ifft(coeffs: np.ndarray) -> np.ndarray:
    if coeffs.ndim == 1:
        return sfft.ifft(coeffs)
    return sfft.ifftn(coeffs)


@lru_cache(maxsize=32)
def k_sq(grid: Grid) -> np.ndarray:
    out = grid.k_sq()
    out.flags.writeable = False
    return out


def laplacian(grid: Grid, values: np.ndarray) -> np.ndarray:
    return ifft(-k_sq(grid) * fft(values))


def spectral_mass(grid: Grid, coeffs: np.ndarray) -> float:
    """sum |u_hat|^2 scaled so that it equals dx^N sum |u|^2 (Parseval)."""
    return float(np.sum(np.abs(coeffs) ** 2)) * grid.cell_volume / grid.size


@lru_cache(maxsize=32)
def _pad_index(grid: Grid, factor: int):
    """Positions of the n coarse modes (FFT order) inside the padded spectrum."""
    n, m = grid.n, grid.n * factor
    idx = np.concatenate([np.arange(n // 2), np.arange(m - n // 2, m)])
    if grid.dim == 1:
        return idx
    return np.ix_(*([idx] * grid.dim))


def pad(grid: Grid, coeffs: np.ndarray, factor: int = PAD_FACTOR) -> np.ndarray:
    """Embed the n^N modes into an (factor n)^N spectrum, scaled for ifft."""
    out = np.zeros((grid.n * factor,) * grid.dim, dtype=np.complex128)
    out[_pad_index(grid, factor)] = coeffs * (factor ** grid.dim)
    return out


def truncate(grid: Grid, fine: np.ndarray, factor: int = PAD_FACTOR) -> np.ndarray:
    return fine[_pad_index(grid, factor)] / (factor ** grid.dim)


def dealiased_power_hat(grid: Grid, coeffs: np.ndarray, alpha: float) -> np.ndarray:
    """Fourier coefficients of |u|^alpha u, computed on the 2x padded grid."""
    fine = ifft(pad(grid, coeffs))
    prod = _kernels.nonlinear_power(fine, alpha)
    return truncate(grid, fft(prod))


def dealiased_power(grid: Grid, values: np.ndarray, alpha: float) -> np.ndarray:
    return ifft(dealiased_power_hat(grid, fft(values), alpha))
