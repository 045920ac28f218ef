"""Dense linear programming front end.

The simplex kernel is compiled when the extension is available and falls back
to the numpy implementation otherwise. Set ``COWLAB_PURE_PYTHON=1`` to force
the fallback.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from cowlab.optim import _simplex_py

try:
    if os.environ.get("COWLAB_PURE_PYTHON"):
        raise ImportError("fallback forced by environment")
    from cowlab.optim import _simplex as _kernel

    BACKEND = "compiled"
except ImportError:
    _kernel = _simplex_py
    BACKEND = "python"


class LpError(RuntimeError):
    pass


class InfeasibleError(LpError):
    pass


class UnboundedError(LpError):
    pass


class IterationLimitError(LpError):
    pass


@dataclass(frozen=True)
class LinearProgram:
    objective: np.ndarray
    a_eq: np.ndarray
    b_eq: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    maximize: bool = False

    def __post_init__(self):
        c = np.asarray(self.objective, dtype=float).ravel()
        n = c.size
        a = np.asarray(self.a_eq, dtype=float).reshape(-1, n)
        b = np.asarray(self.b_eq, dtype=float).ravel()
        lo = np.broadcast_to(np.asarray(self.lower, dtype=float), (n,)).copy()
        hi = np.broadcast_to(np.asarray(self.upper, dtype=float), (n,)).copy()
        if a.shape[0] != b.size:
            raise ValueError("a_eq rows and b_eq length differ")
        if np.any(~np.isfinite(lo)):
            raise ValueError("lower bounds must be finite")
        if np.any(lo > hi):
            raise ValueError("lower bound exceeds upper bound")
        object.__setattr__(self, "objective", c)
        object.__setattr__(self, "a_eq", a)
        object.__setattr__(self, "b_eq", b)
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @classmethod
    def nonneg(cls, objective, a_eq, b_eq, maximize=False):
        n = np.asarray(objective).size
        return cls(objective, a_eq, b_eq, np.zeros(n), np.full(n, np.inf), maximize)


@dataclass(frozen=True)
class LpSolution:
    x: np.ndarray
    objective: float
    duals: np.ndarray
    reduced_costs: np.ndarray
    dual_objective: float
    iterations: int
    backend: str = field(default=BACKEND)


def solve_lp(lp: LinearProgram, max_iter: int = 10000, kernel=None) -> LpSolution:
    """Solve ``lp`` and return an optimal basic solution with its duals.

    Raises InfeasibleError or UnboundedError when no optimum exists.
    """
    impl = _kernel if kernel is None else kernel
    sgn = -1.0 if lp.maximize else 1.0
    c = sgn * lp.objective
    a, b, lo, hi = lp.a_eq, lp.b_eq, lp.lower, lp.upper

    # shift to zero lower bounds and equilibrate rows and objective
    b_shift = b - a @ lo
    row_scale = np.ones(a.shape[0])
    if a.size:
        big = np.abs(a).max(axis=1)
        row_scale = np.where(big > 0.0, 1.0 / np.where(big > 0.0, big, 1.0), 1.0)
    c_scale = np.abs(c).max() if c.size and np.abs(c).max() > 0 else 1.0
    status, xs, ys, it = impl.solve_standard(
        c / c_scale, a * row_scale[:, None], b_shift * row_scale, hi - lo, max_iter
    )
    if status == 1:
        raise InfeasibleError("linear program is infeasible")
    if status == 2:
        raise UnboundedError("linear program is unbounded")
    if status == 3:
        raise IterationLimitError(f"simplex stopped after {it} iterations")

    x = lo + np.asarray(xs)
    y = np.asarray(ys) * row_scale * c_scale
    d = c - a.T @ y
    bound = np.where((d < 0.0) & np.isfinite(hi), hi, lo)
    dual_obj = float(b @ y + d @ bound)
    return LpSolution(
        x=x,
        objective=float(lp.objective @ x),
        duals=sgn * y,
        reduced_costs=sgn * d,
        dual_objective=sgn * dual_obj,
        iterations=int(it),
        backend="python" if impl is _simplex_py else BACKEND,
    )
