# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Bounded-variable revised simplex, compiled kernel.

Same contract and pivoting rules as ``_simplex_py.solve_standard``.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, INFINITY

cnp.import_array()

cdef enum:
    AT_LOWER = 0
    AT_UPPER = 1
    BASIC = 2


cdef void _basic_values(double[:, ::1] Af, double[:, ::1] Binv, double[::1] b,
                        long[::1] basis, long[::1] state, double[::1] x,
                        double[::1] ub, double[::1] rhs) noexcept nogil:
    cdef Py_ssize_t m = Af.shape[0], ntot = Af.shape[1], i, j
    cdef double s
    for i in range(m):
        rhs[i] = b[i]
    for j in range(ntot):
        if state[j] == AT_UPPER:
            for i in range(m):
                rhs[i] -= Af[i, j] * ub[j]
    for i in range(m):
        s = 0.0
        for j in range(m):
            s += Binv[i, j] * rhs[j]
        x[basis[i]] = s


cdef void _pivot(double[:, ::1] Binv, double[::1] alpha, Py_ssize_t r) noexcept nogil:
    cdef Py_ssize_t m = Binv.shape[0], i, j
    cdef double p = alpha[r]
    for j in range(m):
        Binv[r, j] /= p
    for i in range(m):
        if i != r and alpha[i] != 0.0:
            for j in range(m):
                Binv[i, j] -= alpha[i] * Binv[r, j]


cdef int _iterate(double[:, ::1] Af, double[::1] b, double[::1] cost, double[::1] ub,
                  long[::1] basis, long[::1] state, double[::1] x, double[:, ::1] Binv,
                  double[::1] y, double[::1] alpha, double[::1] rhs,
                  long max_iter, double tol, long* it) noexcept nogil:
    cdef Py_ssize_t m = Af.shape[0], ntot = Af.shape[1], i, j, enter, leave
    cdef long degenerate = 0, v
    cdef bint bland = False, take, leave_to_upper, to_upper
    cdef double best, score, dj, direction, step, piv, a, lim
    while True:
        if it[0] >= max_iter:
            return 3
        _basic_values(Af, Binv, b, basis, state, x, ub, rhs)
        for j in range(m):
            y[j] = 0.0
            for i in range(m):
                y[j] += cost[basis[i]] * Binv[i, j]
        enter = -1
        best = 0.0
        for j in range(ntot):
            if state[j] == BASIC or ub[j] <= 0.0:
                continue
            dj = cost[j]
            for i in range(m):
                dj -= y[i] * Af[i, j]
            if state[j] == AT_LOWER and dj < -tol:
                score = -dj
            elif state[j] == AT_UPPER and dj > tol:
                score = dj
            else:
                continue
            if bland:
                enter = j
                break
            if score > best:
                best = score
                enter = j
        if enter < 0:
            return 0
        direction = 1.0 if state[enter] == AT_LOWER else -1.0
        for i in range(m):
            alpha[i] = 0.0
            for j in range(m):
                alpha[i] += Binv[i, j] * Af[j, enter]
        step = ub[enter]
        leave = -1
        leave_to_upper = False
        piv = 0.0
        for i in range(m):
            a = direction * alpha[i]
            v = basis[i]
            if a > tol:
                lim = x[v] / a
                to_upper = False
            elif a < -tol and ub[v] < INFINITY:
                lim = (ub[v] - x[v]) / (-a)
                to_upper = True
            else:
                continue
            if lim < 0.0:
                lim = 0.0
            take = False
            if lim < step - tol:
                take = True
            elif leave >= 0 and lim <= step + tol:
                if bland:
                    take = v < basis[leave]
                else:
                    take = fabs(a) > piv
            elif leave < 0 and lim <= step:
                take = True
            if take:
                step = lim
                leave = i
                leave_to_upper = to_upper
                piv = fabs(a)
        if step == INFINITY:
            return 2
        it[0] += 1
        if step <= tol:
            degenerate += 1
            if degenerate > 2 * ntot:
                bland = True
        else:
            degenerate = 0
        if leave < 0:
            if direction > 0:
                state[enter] = AT_UPPER
                x[enter] = ub[enter]
            else:
                state[enter] = AT_LOWER
                x[enter] = 0.0
            continue
        v = basis[leave]
        if leave_to_upper:
            state[v] = AT_UPPER
            x[v] = ub[v]
        else:
            state[v] = AT_LOWER
            x[v] = 0.0
        x[enter] += direction * step
        state[enter] = BASIC
        basis[leave] = enter
        _pivot(Binv, alpha, leave)


def solve_standard(c, A, b, u, long max_iter=10000, double tol=1e-11):
    """Return (status, x, y, iterations) for the standard-form problem."""
    cdef cnp.ndarray[double, ndim=1] cc = np.ascontiguousarray(c, dtype=float)
    cdef Py_ssize_t n = cc.shape[0]
    A2 = np.asarray(A, dtype=float).reshape(-1, n)
    cdef Py_ssize_t m = A2.shape[0], i, j, r, ii
    bb = np.asarray(b, dtype=float)
    uu = np.asarray(u, dtype=float)
    sign = np.where(bb < 0.0, -1.0, 1.0)
    cdef double[:, ::1] Af = np.ascontiguousarray(np.hstack([A2 * sign[:, None], np.eye(m)]))
    cdef double[::1] bf = np.ascontiguousarray(bb * sign)
    cdef Py_ssize_t ntot = n + m
    cdef double[::1] ub = np.ascontiguousarray(np.concatenate([uu, np.full(m, np.inf)]))
    cdef long[::1] basis = np.arange(n, ntot, dtype=np.int_)
    cdef long[::1] state = np.zeros(ntot, dtype=np.int_)
    for i in range(m):
        state[n + i] = BASIC
    cdef double[::1] x = np.zeros(ntot)
    cdef double[:, ::1] Binv = np.eye(m)
    cdef double[::1] y = np.zeros(m)
    cdef double[::1] alpha = np.zeros(m)
    cdef double[::1] rhs = np.zeros(m)
    cdef double[::1] cost = np.zeros(ntot)
    cdef long it = 0
    cdef int status
    cdef double art, scale, row
    for i in range(m):
        cost[n + i] = 1.0
    status = _iterate(Af, bf, cost, ub, basis, state, x, Binv, y, alpha, rhs,
                      max_iter, tol, &it)
    if status != 0:
        return status, np.asarray(x[:n]).copy(), np.zeros(m), it
    _basic_values(Af, Binv, bf, basis, state, x, ub, rhs)
    art = 0.0
    scale = 1.0
    for i in range(m):
        art += x[n + i]
        scale += fabs(bf[i])
    if art > 1e-9 * scale:
        return 1, np.asarray(x[:n]).copy(), np.zeros(m), it

    for r in range(m):
        if basis[r] < n:
            continue
        for j in range(n):
            if state[j] == BASIC:
                continue
            row = 0.0
            for i in range(m):
                row += Binv[r, i] * Af[i, j]
            if fabs(row) > 1e-9:
                for i in range(m):
                    alpha[i] = 0.0
                    for ii in range(m):
                        alpha[i] += Binv[i, ii] * Af[ii, j]
                state[basis[r]] = AT_LOWER
                x[basis[r]] = 0.0
                state[j] = BASIC
                basis[r] = j
                _pivot(Binv, alpha, r)
                break
    for i in range(m):
        ub[n + i] = 0.0
        cost[n + i] = 0.0
    for j in range(n):
        cost[j] = cc[j]
    status = _iterate(Af, bf, cost, ub, basis, state, x, Binv, y, alpha, rhs,
                      max_iter, tol, &it)
    _basic_values(Af, Binv, bf, basis, state, x, ub, rhs)
    yy = np.zeros(m)
    for j in range(m):
        for i in range(m):
            yy[j] += cost[basis[i]] * Binv[i, j]
    yy *= sign
    xs = np.clip(np.asarray(x[:n]), 0.0, uu)
    return status, xs, yy, it
