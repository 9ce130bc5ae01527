# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels: window correlation scan and the simplex solver.

Mirrors ``_pykernels`` step for step. Loops run without the GIL so the
ensemble can fan experts out over threads.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport log, sqrt

cnp.import_array()

cdef double ARMIJO = 1e-4
cdef double MIN_STEP = 1e-16
cdef double MAX_STEP = 1e10


def window_correlations(const double[:, ::1] rel, Py_ssize_t t, Py_ssize_t w):
    cdef Py_ssize_t n_cand = t - w
    if n_cand <= 0:
        return np.empty(0)
    cdef Py_ssize_t m = rel.shape[1]
    cdef Py_ssize_t size = w * m
    out_arr = np.zeros(n_cand)
    cdef double[::1] out = out_arr
    cdef const double* base = &rel[0, 0]
    cdef const double* cur = base + (t - w) * m
    cdef const double* cand
    cdef Py_ssize_t i, j
    cdef double mean_cur, mean_c, ss_cur, ss, cross, dc, dk, lo, hi, c
    cdef bint flat_cur = False
    with nogil:
        lo = cur[0]
        hi = cur[0]
        mean_cur = 0.0
        for j in range(size):
            mean_cur += cur[j]
            if cur[j] < lo:
                lo = cur[j]
            if cur[j] > hi:
                hi = cur[j]
        flat_cur = hi == lo
        mean_cur /= size
        ss_cur = 0.0
        for j in range(size):
            dc = cur[j] - mean_cur
            ss_cur += dc * dc
        for i in range(n_cand if not flat_cur else 0):
            cand = base + i * m
            lo = cand[0]
            hi = cand[0]
            mean_c = 0.0
            for j in range(size):
                mean_c += cand[j]
                if cand[j] < lo:
                    lo = cand[j]
                if cand[j] > hi:
                    hi = cand[j]
            if hi == lo:
                continue
            mean_c /= size
            ss = 0.0
            cross = 0.0
            for j in range(size):
                dk = cand[j] - mean_c
                ss += dk * dk
                cross += dk * (cur[j] - mean_cur)
            c = cross / sqrt(ss * ss_cur)
            if c > 1.0:
                c = 1.0
            elif c < -1.0:
                c = -1.0
            out[i] = c
    return out_arr


cdef void _project(const double* v, double* out, double* scratch, Py_ssize_t m) noexcept nogil:
    cdef Py_ssize_t i, j, r
    cdef double key, css, theta, cs_r
    for i in range(m):
        scratch[i] = v[i]
    # insertion sort, descending; m is small
    for i in range(1, m):
        key = scratch[i]
        j = i - 1
        while j >= 0 and scratch[j] < key:
            scratch[j + 1] = scratch[j]
            j -= 1
        scratch[j + 1] = key
    css = 0.0
    r = 1
    cs_r = scratch[0]
    for i in range(m):
        css += scratch[i]
        if scratch[i] - (css - 1.0) / (i + 1) > 0:
            r = i + 1
            cs_r = css
    theta = (cs_r - 1.0) / r
    for i in range(m):
        out[i] = v[i] - theta if v[i] - theta > 0.0 else 0.0


cdef double _value(const double* rows, Py_ssize_t n, Py_ssize_t m, const double* b,
                   double lam, double smoothing, double* logs) noexcept nogil:
    cdef Py_ssize_t k, i
    cdef double r, mean = 0.0, var = 0.0, d
    cdef const double* x
    for k in range(n):
        x = rows + k * m
        r = 0.0
        for i in range(m):
            r += x[i] * b[i]
        logs[k] = log(r)
        mean += logs[k]
    mean /= n
    if lam == 0.0:
        return mean
    for k in range(n):
        d = logs[k] - mean
        var += d * d
    return mean - lam * sqrt(var / n + smoothing)


cdef double _value_grad(const double* rows, Py_ssize_t n, Py_ssize_t m, const double* b,
                        double lam, double smoothing, double* logs, double* inv_r,
                        double* grad) noexcept nogil:
    cdef Py_ssize_t k, i
    cdef double r, mean = 0.0, var = 0.0, d, sd, coef
    cdef const double* x
    for k in range(n):
        x = rows + k * m
        r = 0.0
        for i in range(m):
            r += x[i] * b[i]
        inv_r[k] = 1.0 / r
        logs[k] = log(r)
        mean += logs[k]
    mean /= n
    for i in range(m):
        grad[i] = 0.0
    for k in range(n):
        x = rows + k * m
        for i in range(m):
            grad[i] += x[i] * inv_r[k]
    for i in range(m):
        grad[i] /= n
    if lam == 0.0:
        return mean
    for k in range(n):
        d = logs[k] - mean
        var += d * d
    sd = sqrt(var / n + smoothing)
    for k in range(n):
        x = rows + k * m
        coef = lam * (logs[k] - mean) * inv_r[k] / (n * sd)
        for i in range(m):
            grad[i] -= coef * x[i]
    return mean - lam * sd


cdef double _pg_norm(const double* b, const double* g, double* tmp, double* out,
                     double* scratch, Py_ssize_t m) noexcept nogil:
    cdef Py_ssize_t i
    cdef double acc = 0.0, d
    for i in range(m):
        tmp[i] = b[i] + g[i]
    _project(tmp, out, scratch, m)
    for i in range(m):
        d = out[i] - b[i]
        acc += d * d
    return sqrt(acc)


def solve_simplex(const double[:, ::1] rows, double lam, double tol, double improvement_tol,
                  Py_ssize_t max_iter, double smoothing):
    cdef Py_ssize_t n = rows.shape[0]
    cdef Py_ssize_t m = rows.shape[1]
    b_arr = np.full(m, 1.0 / m)
    work = np.empty(6 * m + 2 * n)
    cdef double[::1] bv = b_arr
    cdef double[::1] wv = work
    cdef double* b = &bv[0]
    cdef double* g = &wv[0]
    cdef double* prev_b = &wv[m]
    cdef double* prev_g = &wv[2 * m]
    cdef double* cand = &wv[3 * m]
    cdef double* tmp = &wv[4 * m]
    cdef double* scratch = &wv[5 * m]
    cdef double* logs = &wv[6 * m]
    cdef double* inv_r = &wv[6 * m + n]
    cdef const double* x = &rows[0, 0]
    cdef double f, fc, step = 1.0, sy, ss, dirn, gain, pg_norm
    cdef bint have_prev = False, converged = False
    cdef Py_ssize_t it = 0, i
    with nogil:
        f = _value_grad(x, n, m, b, lam, smoothing, logs, inv_r, g)
        while it < max_iter:
            it += 1
            pg_norm = _pg_norm(b, g, tmp, cand, scratch, m)
            if pg_norm < tol:
                converged = True
                break
            if have_prev:
                sy = 0.0
                ss = 0.0
                for i in range(m):
                    sy += (b[i] - prev_b[i]) * (g[i] - prev_g[i])
                    ss += (b[i] - prev_b[i]) * (b[i] - prev_b[i])
                if sy < 0.0:
                    step = ss / -sy
                else:
                    step = 2.0 * step
                if step < 1e-10:
                    step = 1e-10
                elif step > MAX_STEP:
                    step = MAX_STEP
            while True:
                for i in range(m):
                    tmp[i] = b[i] + step * g[i]
                _project(tmp, cand, scratch, m)
                fc = _value(x, n, m, cand, lam, smoothing, logs)
                dirn = 0.0
                for i in range(m):
                    dirn += g[i] * (cand[i] - b[i])
                if fc >= f + ARMIJO * dirn:
                    break
                step *= 0.5
                if step < MIN_STEP:
                    break
            if step < MIN_STEP:
                converged = True
                break
            for i in range(m):
                prev_b[i] = b[i]
                prev_g[i] = g[i]
                b[i] = cand[i]
            have_prev = True
            gain = fc - f
            f = _value_grad(x, n, m, b, lam, smoothing, logs, inv_r, g)
            if gain <= improvement_tol * (1.0 if f > -1.0 and f < 1.0 else (f if f > 0 else -f)):
                converged = True
                break
        pg_norm = _pg_norm(b, g, tmp, cand, scratch, m)
    return b_arr, it, bool(converged), pg_norm


def project_simplex(const double[::1] v):
    cdef Py_ssize_t m = v.shape[0]
    out_arr = np.empty(m)
    scratch_arr = np.empty(m)
    cdef double[::1] out = out_arr
    cdef double[::1] scratch = scratch_arr
    with nogil:
        _project(&v[0], &out[0], &scratch[0], m)
    return out_arr
