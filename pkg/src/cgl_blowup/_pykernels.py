"""Pure numpy/Python kernels; reference behaviour for the compiled module."""

import numpy as np


def nonlinear_power(u, alpha, out=None):
    """out = |u|^alpha u, elementwise on a complex array."""
    if out is None:
        out = np.empty_like(u)
    if alpha == 2.0:
        np.multiply(u.real * u.real + u.imag * u.imag, u, out=out)
    else:
        np.multiply(np.abs(u) ** alpha, u, out=out)
    return out


def power_sum(u, p):
    """sum |u|^p over all entries."""
    a = np.abs(u)
    if p == 2.0:
        return float(np.sum(a * a))
    if p == 4.0:
        a2 = a * a
        return float(np.sum(a2 * a2))
    return float(np.sum(a ** p))


def gn_sweep(w, kw, k1, n, dim, alpha, delta, s2, g2, pp, dv):
    """One coordinate-ascent sweep maximising the Gagliardo-Nirenberg ratio.

    ``w`` (real, flattened C-order, length n**dim) and ``kw`` (= -Lap w) are
    updated in place.  ``k1`` is the 1-D circulant kernel of -d^2/dx^2.
    s2, g2, pp are sum w^2, sum w kw, sum |w|^(alpha+2) without the volume
    factor ``dv``.  Returns (s2, g2, pp, accepted).
    """
    p = alpha + 2.0
    eg = dim * alpha / 4.0
    es = (4.0 - (dim - 2) * alpha) / 4.0
    kdiag = dim * k1[0]
    strides = [n ** (dim - 1 - a) for a in range(dim)]
    idx = np.arange(n)

    def log_ratio(s, g, q):
        return np.log(dv * q) - eg * np.log(dv * g) - es * np.log(dv * s)

    best = log_ratio(s2, g2, pp)
    accepted = 0
    total = n ** dim
    for j in range(total):
        wj = w[j]
        kwj = kw[j]
        pj = abs(wj) ** p
        choice = None
        for d in (delta, -delta):
            s_new = s2 + 2.0 * wj * d + d * d
            g_new = g2 + 2.0 * d * kwj + d * d * kdiag
            p_new = pp - pj + abs(wj + d) ** p
            if s_new <= 0 or g_new <= 0 or p_new <= 0:
                continue
            r = log_ratio(s_new, g_new, p_new)
            if r > best:
                best = r
                choice = (d, s_new, g_new, p_new)
        if choice is None:
            continue
        d, s2, g2, pp = choice
        w[j] = wj + d
        rem = j
        for a in range(dim):
            c = rem // strides[a]
            rem -= c * strides[a]
            base = j - c * strides[a]
            kw[base + ((c + idx) % n) * strides[a]] += d * k1
        accepted += 1
    return s2, g2, pp, accepted
