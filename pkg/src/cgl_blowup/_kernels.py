"""Kernel dispatch: compiled extension when importable, numpy fallback otherwise.

Set ``CGL_PURE_PYTHON=1`` to force the fallback.
"""

import os

import numpy as np

from . import _pykernels

BACKEND = "python"
_impl = _pykernels

if os.environ.get("CGL_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl  # noqa: F811

        BACKEND = "compiled"
    except ImportError:
        _impl = _pykernels


def backends():
    """Mapping name -> kernel module for every available backend."""
    out = {"python": _pykernels}
    try:
        from . import _ckernels

        out["compiled"] = _ckernels
    except ImportError:
        pass
    return out


def _resolve(impl):
    """None for the active backend, a backend name, or a kernel module."""
    if impl is None:
        return _impl
    if isinstance(impl, str):
        try:
            return backends()[impl]
        except KeyError:
            raise ValueError(f"unknown or unavailable kernel backend {impl!r}") from None
    return impl


def nonlinear_power(u, alpha, impl=None):
    impl = _resolve(impl)
    flat = np.ascontiguousarray(u, dtype=np.complex128).reshape(-1)
    return np.asarray(impl.nonlinear_power(flat, float(alpha))).reshape(np.shape(u))


def power_sum(u, p, impl=None):
    impl = _resolve(impl)
    flat = np.ascontiguousarray(u, dtype=np.complex128).reshape(-1)
    return float(impl.power_sum(flat, float(p)))


def gn_sweep(w, kw, k1, n, dim, alpha, delta, s2, g2, pp, dv, impl=None):
    impl = _resolve(impl)
    return impl.gn_sweep(w, kw, k1, int(n), int(dim), float(alpha), float(delta),
                         float(s2), float(g2), float(pp), float(dv))
