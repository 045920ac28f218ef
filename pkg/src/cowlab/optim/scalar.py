"""Bracketed root finding and 1-D maximization."""

from __future__ import annotations

import math
from typing import Callable


class NoSignChangeError(ValueError):
    pass


def find_root(f: Callable[[float], float], lo: float, hi: float, tol: float = 1e-12,
              max_iter: int = 200, log_scale: bool = False) -> float:
    """Bisection on [lo, hi]; returns the midpoint of the final bracket.

    With ``log_scale`` the bracket is bisected geometrically (lo > 0) and
    ``tol`` is relative.
    """
    flo, fhi = f(lo), f(hi)
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise NoSignChangeError(f"no sign change on [{lo}, {hi}]")
    for _ in range(max_iter):
        if log_scale:
            if hi / lo - 1.0 <= tol:
                break
            mid = math.sqrt(lo * hi)
        else:
            if hi - lo <= tol:
                break
            mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        fm = f(mid)
        if fm == 0:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi, fhi = mid, fm
    return math.sqrt(lo * hi) if log_scale else 0.5 * (lo + hi)


_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def maximize_1d(f: Callable[[float], float], lo: float, hi: float, grid_n: int = 64,
                refine_iters: int = 40) -> tuple[float, float]:
    """Grid search followed by golden-section refinement of the best cell.

    Ties go to the smaller argument. Non-finite values count as -inf.
    """
    if not lo < hi:
        raise ValueError("need lo < hi")
    grid_n = max(int(grid_n), 2)

    def g(x):
        v = f(x)
        return v if v == v else -math.inf

    xs = [lo + (hi - lo) * i / (grid_n - 1) for i in range(grid_n)]
    vals = [g(x) for x in xs]
    ib = 0
    for i, v in enumerate(vals):
        if v > vals[ib]:
            ib = i
    best_x, best_v = xs[ib], vals[ib]
    if refine_iters <= 0 or best_v == -math.inf:
        return best_x, best_v
    a = xs[max(ib - 1, 0)]
    b = xs[min(ib + 1, grid_n - 1)]
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = g(c), g(d)
    for _ in range(refine_iters):
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = g(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = g(d)
    for x, v in sorted([(c, fc), (d, fd)]):
        if v > best_v:
            best_x, best_v = x, v
    return best_x, best_v
