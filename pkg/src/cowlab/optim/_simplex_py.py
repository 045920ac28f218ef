"""Bounded-variable revised simplex, pure numpy fallback.

Solves  min c.x  s.t.  A x = b,  0 <= x <= u  (u may hold +inf).
The compiled twin in ``_simplex.pyx`` follows the same pivoting rules.
"""

import numpy as np

OPTIMAL = 0
INFEASIBLE = 1
UNBOUNDED = 2
ITERATION_LIMIT = 3

_AT_LOWER = 0
_AT_UPPER = 1
_BASIC = 2


def _basic_values(Af, Binv, b, basis, state, x, ub):
    rhs = b.copy()
    upper = np.nonzero(state == _AT_UPPER)[0]
    if upper.size:
        rhs -= Af[:, upper] @ ub[upper]
    x[basis] = Binv @ rhs


def _iterate(Af, b, cost, ub, basis, state, x, Binv, max_iter, tol, it0):
    m, ntot = Af.shape
    it = it0
    degenerate = 0
    bland = False
    while True:
        if it >= max_iter:
            return ITERATION_LIMIT, it
        _basic_values(Af, Binv, b, basis, state, x, ub)
        y = cost[basis] @ Binv
        d = cost - y @ Af
        enter = -1
        best = 0.0
        for j in range(ntot):
            s = state[j]
            if s == _BASIC or ub[j] <= 0.0:
                continue
            if s == _AT_LOWER and d[j] < -tol:
                score = -d[j]
            elif s == _AT_UPPER and d[j] > tol:
                score = d[j]
            else:
                continue
            if bland:
                enter = j
                break
            if score > best:
                best = score
                enter = j
        if enter < 0:
            return OPTIMAL, it
        direction = 1.0 if state[enter] == _AT_LOWER else -1.0
        alpha = Binv @ Af[:, enter]
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
            elif a < -tol and ub[v] < np.inf:
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
                    take = abs(a) > piv
            elif leave < 0 and lim <= step:
                take = True
            if take:
                step = lim
                leave = i
                leave_to_upper = to_upper
                piv = abs(a)
        if step == np.inf:
            return UNBOUNDED, it
        it += 1
        if step <= tol:
            degenerate += 1
            if degenerate > 2 * ntot:
                bland = True
        else:
            degenerate = 0
        if leave < 0:
            state[enter] = _AT_UPPER if direction > 0 else _AT_LOWER
            x[enter] = ub[enter] if direction > 0 else 0.0
            continue
        out = basis[leave]
        state[out] = _AT_UPPER if leave_to_upper else _AT_LOWER
        x[out] = ub[out] if leave_to_upper else 0.0
        x[enter] += direction * step
        state[enter] = _BASIC
        basis[leave] = enter
        pr = Binv[leave] / alpha[leave]
        Binv -= np.outer(alpha, pr)
        Binv[leave] = pr


def solve_standard(c, A, b, u, max_iter=10000, tol=1e-11):
    """Return (status, x, y, iterations) for the standard-form problem.

    ``y`` are the equality multipliers of the original rows.
    """
    c = np.asarray(c, dtype=float)
    A = np.asarray(A, dtype=float).reshape(-1, c.size)
    b = np.asarray(b, dtype=float)
    u = np.asarray(u, dtype=float)
    m, n = A.shape
    sign = np.where(b < 0.0, -1.0, 1.0)
    Af = np.hstack([A * sign[:, None], np.eye(m)])
    bf = b * sign
    ntot = n + m
    ub = np.concatenate([u, np.full(m, np.inf)])
    basis = np.arange(n, ntot)
    state = np.full(ntot, _AT_LOWER, dtype=np.int64)
    state[basis] = _BASIC
    x = np.zeros(ntot)
    Binv = np.eye(m)

    cost1 = np.concatenate([np.zeros(n), np.ones(m)])
    status, it = _iterate(Af, bf, cost1, ub, basis, state, x, Binv, max_iter, tol, 0)
    if status != OPTIMAL:
        return status, x[:n].copy(), np.zeros(m), it
    _basic_values(Af, Binv, bf, basis, state, x, ub)
    if x[n:].sum() > 1e-9 * (1.0 + np.abs(bf).sum()):
        return INFEASIBLE, x[:n].copy(), np.zeros(m), it

    # push zero-level artificials out of the basis where a structural pivot exists
    for r in range(m):
        if basis[r] < n:
            continue
        row = Binv[r] @ Af[:, :n]
        for j in range(n):
            if state[j] != _BASIC and abs(row[j]) > 1e-9:
                alpha = Binv @ Af[:, j]
                out = basis[r]
                state[out] = _AT_LOWER
                x[out] = 0.0
                state[j] = _BASIC
                basis[r] = j
                pr = Binv[r] / alpha[r]
                Binv -= np.outer(alpha, pr)
                Binv[r] = pr
                break
    ub[n:] = 0.0
    cost2 = np.concatenate([c, np.zeros(m)])
    status, it = _iterate(Af, bf, cost2, ub, basis, state, x, Binv, max_iter, tol, it)
    _basic_values(Af, Binv, bf, basis, state, x, ub)
    y = (cost2[basis] @ Binv) * sign
    xs = np.clip(x[:n], 0.0, u)
    return status, xs, y, it
