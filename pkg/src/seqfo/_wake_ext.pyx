# cython: language_level=3
"""Compiled wake kernels. Same contracts as ``_wake_py``."""

import numpy as np
from libc.math cimport exp, sin, cos, sqrt, INFINITY


cdef inline double _deficit(double s, double dy, double a, double sg,
                            double diameter, double k_w, double k_d,
                            double* sens, double* q_out, double* gauss_out) nogil:
    cdef double width = diameter + 2.0 * k_w * s
    cdef double sigma = 0.5 * width
    cdef double q = (diameter / width) * (diameter / width)
    cdef double delta = dy - k_d * a * sg * s
    cdef double g = exp(-(delta * delta) / (2.0 * sigma * sigma))
    sens[0] = delta / (sigma * sigma)
    q_out[0] = q
    gauss_out[0] = g
    return 2.0 * a * q * g


def park_speeds(x, y, a, gamma, double diameter, double v_inf, double k_w, double k_d):
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef const double[::1] yv = np.ascontiguousarray(y, dtype=np.float64)
    cdef const double[::1] av = np.ascontiguousarray(a, dtype=np.float64)
    cdef const double[::1] gv = np.ascontiguousarray(gamma, dtype=np.float64)
    cdef Py_ssize_t n = xv.shape[0]
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] ov = out
    cdef Py_ssize_t i, j
    cdef double s, d, acc, sens, q, g
    with nogil:
        for j in range(n):
            acc = 0.0
            for i in range(n):
                s = xv[j] - xv[i]
                if s <= 0.0:
                    continue
                d = _deficit(s, yv[j] - yv[i], av[i], sin(gv[i]),
                             diameter, k_w, k_d, &sens, &q, &g)
                acc += d * d
            acc = sqrt(acc)
            if acc > 1.0:
                acc = 1.0
            ov[j] = v_inf * (1.0 - acc)
    return out


def park_speeds_jacobian(x, y, a, gamma, double diameter, double v_inf,
                         double k_w, double k_d):
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef const double[::1] yv = np.ascontiguousarray(y, dtype=np.float64)
    cdef const double[::1] av = np.ascontiguousarray(a, dtype=np.float64)
    cdef const double[::1] gv = np.ascontiguousarray(gamma, dtype=np.float64)
    cdef Py_ssize_t n = xv.shape[0]
    v = np.empty(n, dtype=np.float64)
    dv_da = np.zeros((n, n), dtype=np.float64)
    dv_dg = np.zeros((n, n), dtype=np.float64)
    dmat = np.zeros((n, n), dtype=np.float64)
    cdef double[::1] vv = v
    cdef double[:, ::1] ja = dv_da
    cdef double[:, ::1] jg = dv_dg
    cdef double[:, ::1] dm = dmat
    cdef Py_ssize_t i, j
    cdef double s, d, acc, sens, q, g, sg, cg, scale
    with nogil:
        for j in range(n):
            acc = 0.0
            for i in range(n):
                s = xv[j] - xv[i]
                if s <= 0.0:
                    continue
                d = _deficit(s, yv[j] - yv[i], av[i], sin(gv[i]),
                             diameter, k_w, k_d, &sens, &q, &g)
                dm[i, j] = d
                acc += d * d
            acc = sqrt(acc)
            vv[j] = v_inf * (1.0 - (acc if acc < 1.0 else 1.0))
            if acc <= 0.0 or acc >= 1.0:
                continue
            for i in range(n):
                s = xv[j] - xv[i]
                if s <= 0.0:
                    continue
                sg = sin(gv[i])
                cg = cos(gv[i])
                d = _deficit(s, yv[j] - yv[i], av[i], sg,
                             diameter, k_w, k_d, &sens, &q, &g)
                scale = -v_inf * d / acc
                ja[j, i] = scale * (2.0 * q * g + d * sens * k_d * sg * s)
                jg[j, i] = scale * (d * sens * k_d * av[i] * cg * s)
    return v, dv_da, dv_dg


def grid_pair_min(upstream_power, cubed_speed, reg_first, coeff, reg_second,
                  double p_ref):
    cdef const double[::1] A = np.ascontiguousarray(upstream_power, dtype=np.float64)
    cdef const double[::1] c = np.ascontiguousarray(cubed_speed, dtype=np.float64)
    cdef const double[::1] r1 = np.ascontiguousarray(reg_first, dtype=np.float64)
    cdef const double[::1] B = np.ascontiguousarray(coeff, dtype=np.float64)
    cdef const double[::1] r2 = np.ascontiguousarray(reg_second, dtype=np.float64)
    cdef Py_ssize_t n1 = A.shape[0]
    cdef Py_ssize_t n2 = B.shape[0]
    cdef Py_ssize_t p, qi, best_p = -1, best_q = -1
    cdef double best = INFINITY
    cdef double t, J, ap, cp, rp
    with nogil:
        for p in range(n1):
            ap = A[p] - p_ref
            cp = c[p]
            rp = r1[p]
            for qi in range(n2):
                t = (ap + B[qi] * cp) / p_ref
                J = t * t + rp + r2[qi]
                if J < best:
                    best = J
                    best_p = p
                    best_q = qi
    return best_p, best_q, best
