# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled implementations of the hot kernels (see _pykernels for the spec)."""

import numpy as np

cimport numpy as cnp
from libc.math cimport cos, fabs, sin

cnp.import_array()


def simpson(values, double dt):
    y = np.ascontiguousarray(values, dtype=np.float64)
    flat = y.reshape(-1, y.shape[y.ndim - 1])
    cdef double[:, ::1] v = flat
    cdef Py_ssize_t nb = v.shape[0]
    cdef Py_ssize_t n = v.shape[1] - 1
    if n < 2 or n % 2:
        raise ValueError(f"Simpson needs an even number of intervals >= 2, got {n}")
    out = np.empty(nb, dtype=np.float64)
    cdef double[::1] o = out
    cdef Py_ssize_t b, i
    cdef double acc
    for b in range(nb):
        acc = v[b, 0] + v[b, n]
        for i in range(1, n, 2):
            acc += 4.0 * v[b, i]
        for i in range(2, n - 1, 2):
            acc += 2.0 * v[b, i]
        o[b] = acc * dt / 3.0
    if y.ndim == 1:
        return float(out[0])
    return out.reshape(tuple(y.shape)[: y.ndim - 1])


def cumulative_simpson(values, double dt):
    y = np.ascontiguousarray(values, dtype=np.float64)
    flat = y.reshape(-1, y.shape[y.ndim - 1])
    cdef double[:, ::1] v = flat
    cdef Py_ssize_t nb = v.shape[0]
    cdef Py_ssize_t n = v.shape[1] - 1
    if n < 2 or n % 2:
        raise ValueError(f"cumulative Simpson needs an even number of intervals >= 2, got {n}")
    out = np.zeros((nb, n + 1), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef Py_ssize_t b, j
    cdef double c = dt / 12.0
    cdef double first, second, acc
    for b in range(nb):
        acc = 0.0
        for j in range(0, n, 2):
            first = c * (5.0 * v[b, j] + 8.0 * v[b, j + 1] - v[b, j + 2])
            second = c * (-v[b, j] + 8.0 * v[b, j + 1] + 5.0 * v[b, j + 2])
            o[b, j + 1] = acc + first
            acc += first + second
            o[b, j + 2] = acc
    return out.reshape(y.shape)


def solve_small_batch(mats, rhs):
    a = np.array(mats, dtype=np.float64, order="C")
    b = np.array(rhs, dtype=np.float64, order="C")
    cdef double[:, :, ::1] av = a
    cdef double[:, ::1] bv = b
    cdef Py_ssize_t nb = av.shape[0]
    cdef Py_ssize_t m = av.shape[1]
    x = np.zeros((nb, m), dtype=np.float64)
    cdef double[:, ::1] xv = x
    cdef Py_ssize_t ib, k, i, j, piv_row
    cdef double scale, best, piv, factor, acc, tmp
    cdef double min_rel = np.inf
    for ib in range(nb):
        scale = 0.0
        for i in range(m):
            for j in range(m):
                if fabs(av[ib, i, j]) > scale:
                    scale = fabs(av[ib, i, j])
        if scale == 0.0:
            scale = 1.0
        for k in range(m):
            piv_row = k
            best = fabs(av[ib, k, k])
            for i in range(k + 1, m):
                if fabs(av[ib, i, k]) > best:
                    best = fabs(av[ib, i, k])
                    piv_row = i
            if piv_row != k:
                for j in range(m):
                    tmp = av[ib, k, j]
                    av[ib, k, j] = av[ib, piv_row, j]
                    av[ib, piv_row, j] = tmp
                tmp = bv[ib, k]
                bv[ib, k] = bv[ib, piv_row]
                bv[ib, piv_row] = tmp
            piv = av[ib, k, k]
            if fabs(piv) / scale < min_rel:
                min_rel = fabs(piv) / scale
            if piv == 0.0:
                piv = 1.0
            for i in range(k + 1, m):
                factor = av[ib, i, k] / piv
                for j in range(k, m):
                    av[ib, i, j] -= factor * av[ib, k, j]
                bv[ib, i] -= factor * bv[ib, k]
        for k in range(m - 1, -1, -1):
            acc = bv[ib, k]
            for j in range(k + 1, m):
                acc -= av[ib, k, j] * xv[ib, j]
            piv = av[ib, k, k]
            if piv == 0.0:
                piv = 1.0
            xv[ib, k] = acc / piv
    return x, min_rel


def mode_field(k_hat, n_circ, omega, amp_cos, amp_sin, x, theta, double t):
    cdef double[::1] kv = np.ascontiguousarray(k_hat, dtype=np.float64)
    cdef double[::1] nv = np.ascontiguousarray(n_circ, dtype=np.float64)
    cdef double[::1] wv = np.ascontiguousarray(omega, dtype=np.float64)
    cdef double[::1] ac = np.ascontiguousarray(amp_cos, dtype=np.float64)
    cdef double[::1] as_ = np.ascontiguousarray(amp_sin, dtype=np.float64)
    cdef double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef double[::1] tv = np.ascontiguousarray(theta, dtype=np.float64)
    cdef Py_ssize_t nm = kv.shape[0]
    cdef Py_ssize_t nx = xv.shape[0]
    cdef Py_ssize_t nt = tv.shape[0]
    field = np.zeros((nx, nt), dtype=np.float64)
    dt_field = np.zeros((nx, nt), dtype=np.float64)
    cdef double[:, ::1] fv = field
    cdef double[:, ::1] dv = dt_field
    cdef Py_ssize_t m, i, j
    cdef double ph, cp, sp, base
    for m in range(nm):
        for i in range(nx):
            base = kv[m] * xv[i] - wv[m] * t
            for j in range(nt):
                ph = base + nv[m] * tv[j]
                cp = cos(ph)
                sp = sin(ph)
                fv[i, j] += ac[m] * cp + as_[m] * sp
                dv[i, j] += ac[m] * wv[m] * sp - as_[m] * wv[m] * cp
    return field, dt_field
