# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled SGD epoch kernel; twin of phrasecap._sgd_py.sgd_epoch."""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, log1p, fabs

cnp.import_array()


cdef inline double softplus(double z) nogil:
    # log(1 + e^z) without overflow
    if z > 0:
        return z + log1p(exp(-z))
    return log1p(exp(z))


def sgd_epoch(double[:, ::1] x_rows, double[:, ::1] u, double[:, ::1] v,
              long[::1] img_idx, long[::1] pos_ids, long[:, ::1] neg_ids,
              double lr):
    cdef Py_ssize_t steps = img_idx.shape[0]
    cdef Py_ssize_t n = u.shape[0]
    cdef Py_ssize_t m = u.shape[1]
    cdef Py_ssize_t n_neg = neg_ids.shape[1]
    cdef Py_ssize_t t, a, b, k, img, pos, col
    cdef double total = 0.0
    cdef double f, r, xa

    g_buf = np.empty(m, dtype=np.float64)
    dg_buf = np.empty(m, dtype=np.float64)
    rneg_buf = np.empty(n_neg, dtype=np.float64)
    cdef double[::1] g = g_buf
    cdef double[::1] dg = dg_buf
    cdef double[::1] r_neg = rneg_buf
    cdef double r_pos, f_pos

    with nogil:
        for t in range(steps):
            img = img_idx[t]
            pos = pos_ids[t]

            for b in range(m):
                f = 0.0
                for a in range(n):
                    f += x_rows[img, a] * u[a, b]
                g[b] = f

            f_pos = 0.0
            for b in range(m):
                f_pos += g[b] * v[b, pos]
            total += softplus(-f_pos)
            r_pos = -1.0 / (1.0 + exp(f_pos))
            for b in range(m):
                dg[b] = r_pos * v[b, pos]

            for k in range(n_neg):
                col = neg_ids[t, k]
                f = 0.0
                for b in range(m):
                    f += g[b] * v[b, col]
                total += softplus(f)
                r = 1.0 / (1.0 + exp(-f))
                r_neg[k] = r
                for b in range(m):
                    dg[b] += r * v[b, col]

            for a in range(n):
                xa = lr * x_rows[img, a]
                for b in range(m):
                    u[a, b] -= xa * dg[b]

            for b in range(m):
                v[b, pos] -= lr * r_pos * g[b]
            for k in range(n_neg):
                col = neg_ids[t, k]
                r = lr * r_neg[k]
                for b in range(m):
                    v[b, col] -= r * g[b]
    return total
