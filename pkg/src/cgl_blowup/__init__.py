"""Numerical laboratory for u_t = e^{i theta}[Lap u + |u|^alpha u] + gamma u on a periodic box."""

from .core import (DiagnosticsRecord, Field, Grid, Params, TimeSeries, Violation,
                   constant, default_grid, gaussian, ok_for, random_bandlimited, ring,
                   validate_params)
from .solver import SimOutcome, StepControls, simulate

__version__ = "0.1.0"

__all__ = [
    "Params", "Grid", "Field", "TimeSeries", "DiagnosticsRecord", "Violation",
    "validate_params", "ok_for", "default_grid", "gaussian", "constant", "ring",
    "random_bandlimited", "StepControls", "SimOutcome", "simulate",
]
