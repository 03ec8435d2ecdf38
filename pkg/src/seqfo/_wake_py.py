"""Pure numpy implementation of the wake kernels.

Mirrors ``_wake_ext.pyx`` function for function. Yaw angles are radians here;
degree conversion happens in :mod:`seqfo.bench.farm`.
"""

import numpy as np


def _pair_terms(x, y, a, gamma, diameter, k_w, k_d):
    # s[i, j] = x[j] - x[i]: downwind distance from upstream i to j.
    s = x[None, :] - x[:, None]
    upstream = s > 0.0
    s = np.where(upstream, s, 0.0)
    width = diameter + 2.0 * k_w * s
    sigma = 0.5 * width
    q = (diameter / width) ** 2
    sin_g = np.sin(gamma)[:, None]
    offset = k_d * a[:, None] * sin_g * s
    delta = y[None, :] - y[:, None] - offset
    gauss = np.exp(-(delta**2) / (2.0 * sigma**2))
    d = np.where(upstream, 2.0 * a[:, None] * q * gauss, 0.0)
    return s, sigma, q, delta, gauss, d, upstream


def park_speeds(x, y, a, gamma, diameter, v_inf, k_w, k_d):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    a = np.asarray(a, dtype=float)
    gamma = np.asarray(gamma, dtype=float)
    d = _pair_terms(x, y, a, gamma, diameter, k_w, k_d)[5]
    combined = np.sqrt(np.sum(d * d, axis=0))
    return v_inf * (1.0 - np.minimum(1.0, combined))


def park_speeds_jacobian(x, y, a, gamma, diameter, v_inf, k_w, k_d):
    """Speeds plus d(speed_j)/d(a_i) and d(speed_j)/d(gamma_i), shape (N, N)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    a = np.asarray(a, dtype=float)
    gamma = np.asarray(gamma, dtype=float)
    s, sigma, q, delta, gauss, d, upstream = _pair_terms(
        x, y, a, gamma, diameter, k_w, k_d)
    combined = np.sqrt(np.sum(d * d, axis=0))
    v = v_inf * (1.0 - np.minimum(1.0, combined))

    sin_g = np.sin(gamma)[:, None]
    cos_g = np.cos(gamma)[:, None]
    # dE/d(offset) = E * delta / sigma^2
    sens = np.where(upstream, delta / sigma**2, 0.0)
    dd_da = 2.0 * q * gauss + d * sens * k_d * sin_g * s
    dd_dg = d * sens * k_d * a[:, None] * cos_g * s
    dd_da = np.where(upstream, dd_da, 0.0)
    dd_dg = np.where(upstream, dd_dg, 0.0)

    active = (combined > 0.0) & (combined < 1.0)
    safe = np.where(active, combined, 1.0)
    dc = np.where(active[None, :], d / safe[None, :], 0.0)
    # result rows index the speed j, columns the control i
    dv_da = (-v_inf * dc * dd_da).T
    dv_dg = (-v_inf * dc * dd_dg).T
    return v, dv_da, dv_dg


def grid_pair_min(upstream_power, cubed_speed, reg_first, coeff, reg_second, p_ref):
    """Exhaustive minimum of ((A[p] + B[q] c[p] - Pref) / Pref)^2 + r1[p] + r2[q].

    Returns ``(p, q, cost)`` of the first minimiser in row-major order.
    """
    A = np.asarray(upstream_power, dtype=float)
    c = np.asarray(cubed_speed, dtype=float)
    r1 = np.asarray(reg_first, dtype=float)
    B = np.asarray(coeff, dtype=float)
    r2 = np.asarray(reg_second, dtype=float)
    best = np.inf
    best_p = best_q = -1
    chunk = max(1, 2_000_000 // max(1, B.size))
    for start in range(0, A.size, chunk):
        stop = min(A.size, start + chunk)
        t = ((A[start:stop, None] - p_ref) + B[None, :] * c[start:stop, None]) / p_ref
        J = t * t + r1[start:stop, None] + r2[None, :]
        flat = int(np.argmin(J))
        val = J.flat[flat]
        if val < best:
            best = float(val)
            best_p = start + flat // B.size
            best_q = flat % B.size
    return best_p, best_q, best
