"""Small dense block-diagonal SDP solver.

Primal   min <C, X>  s.t. <A_i, X> = b_i,  X >= 0 (blockwise)
Dual     max b.y     s.t. sum_i y_i A_i + S = C,  S >= 0

Infeasible-start primal-dual path following with Nesterov-Todd scaling and a
Mehrotra predictor-corrector. Before iterating, constraints that pin a block
to a face of the cone (zero right-hand side, semidefinite coefficient) are
used to shrink that block to the face, and redundant rows are dropped.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class SdpError(RuntimeError):
    pass


class SdpConvergenceError(SdpError):
    def __init__(self, message, report):
        super().__init__(message)
        self.report = report


@dataclass(frozen=True)
class SdpProblem:
    block_sizes: tuple
    objective: tuple
    constraints: tuple
    rhs: np.ndarray

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.block_sizes)
        obj = tuple(np.asarray(c, dtype=float).reshape(s, s) for c, s in zip(self.objective, sizes))
        cons = tuple(
            tuple(np.asarray(a, dtype=float).reshape(s, s) for a, s in zip(row, sizes))
            for row in self.constraints
        )
        rhs = np.asarray(self.rhs, dtype=float).ravel()
        if len(obj) != len(sizes) or any(len(row) != len(sizes) for row in cons):
            raise ValueError("every matrix list needs one entry per block")
        if rhs.size != len(cons):
            raise ValueError("rhs length differs from constraint count")
        for mat in obj + tuple(a for row in cons for a in row):
            if mat.size and np.abs(mat - mat.T).max() > 1e-14 * max(1.0, np.abs(mat).max()):
                raise ValueError("coefficient matrices must be symmetric")
        object.__setattr__(self, "block_sizes", sizes)
        object.__setattr__(self, "objective", obj)
        object.__setattr__(self, "constraints", cons)
        object.__setattr__(self, "rhs", rhs)

    @property
    def n_constraints(self):
        return len(self.constraints)


@dataclass(frozen=True)
class SdpSolution:
    blocks: tuple
    y: np.ndarray
    primal_objective: float
    dual_objective: float
    primal_residual: float
    dual_residual: float
    min_eigenvalue: float
    iterations: int
    reduced_sizes: tuple

    @property
    def gap(self):
        return self.primal_objective - self.dual_objective

    @property
    def relative_gap(self):
        scale = max(abs(self.primal_objective), abs(self.dual_objective), 1e-300)
        return abs(self.gap) / scale


def _inner(a_blocks, x_blocks):
    return sum(float(np.vdot(a, x)) for a, x in zip(a_blocks, x_blocks))


def facial_reduction(p: SdpProblem, tol: float = 1e-12):
    """Return (reduced problem, per-block bases Q, kept constraint indices).

    A feasible X of ``p`` is recovered as Q_k Xr_k Q_k^T from a feasible Xr of
    the reduced problem; objectives coincide.
    """
    sizes = list(p.block_sizes)
    qs = [np.eye(s) for s in sizes]
    obj = [c.copy() for c in p.objective]
    cons = [[a.copy() for a in row] for row in p.constraints]
    rhs = p.rhs.copy()
    keep = list(range(len(cons)))
    bscale = 1.0 + np.abs(rhs).max(initial=0.0)

    changed = True
    while changed:
        changed = False
        face = [np.zeros((s, s)) for s in sizes]
        for i, row in enumerate(cons):
            if abs(rhs[i]) > tol * bscale:
                continue
            nz = [k for k, a in enumerate(row) if a.size and np.abs(a).max() > tol]
            if len(nz) != 1:
                continue
            k = nz[0]
            w = np.linalg.eigvalsh(row[k])
            top = np.abs(w).max()
            if w.min() >= -tol * top:
                face[k] += row[k] / top
            elif w.max() <= tol * top:
                face[k] -= row[k] / top
        for k, mat in enumerate(face):
            if sizes[k] == 0 or not np.any(mat):
                continue
            w, v = np.linalg.eigh(mat)
            null = v[:, w <= tol * max(1.0, w.max())]
            if null.shape[1] == sizes[k]:
                continue
            changed = True
            qs[k] = qs[k] @ null
            sizes[k] = null.shape[1]
            obj[k] = null.T @ obj[k] @ null
            for row in cons:
                row[k] = null.T @ row[k] @ null

        # drop vanished and linearly dependent rows
        flat = [np.concatenate([a.ravel() for a in row]) if row else np.zeros(0) for row in cons]
        basis_rows = []
        new_cons, new_rhs, new_keep = [], [], []
        for i, vec in enumerate(flat):
            trial = basis_rows + [vec]
            mat = np.array(trial)
            if np.linalg.matrix_rank(mat, tol=1e-10 * max(1.0, np.abs(mat).max())) == len(trial):
                basis_rows.append(vec)
                new_cons.append(cons[i])
                new_rhs.append(rhs[i])
                new_keep.append(keep[i])
            else:
                if basis_rows:
                    coef, *_ = np.linalg.lstsq(np.array(basis_rows).T, vec, rcond=None)
                    implied = float(coef @ np.array(new_rhs))
                else:
                    implied = 0.0
                if abs(implied - rhs[i]) > 1e-9 * bscale:
                    raise SdpError("equality constraints are inconsistent")
        if len(new_cons) != len(cons):
            changed = True
        cons, rhs, keep = new_cons, np.array(new_rhs), new_keep

    reduced = SdpProblem(tuple(sizes), tuple(obj), tuple(tuple(r) for r in cons), rhs)
    return reduced, qs, keep


def _chol(m):
    return np.linalg.cholesky(m)


def _max_step(lx, dx):
    """Largest alpha with L L^T + alpha dX still PSD (inf when unlimited)."""
    if lx.size == 0:
        return np.inf
    z = np.linalg.solve(lx, np.linalg.solve(lx, dx).T)
    w = np.linalg.eigvalsh((z + z.T) / 2)
    return np.inf if w[0] >= 0 else -1.0 / w[0]


def _ipm(p: SdpProblem, tol_gap, tol_feas, max_iter):
    sizes = p.block_sizes
    m = p.n_constraints
    nk = [s for s in sizes]
    ntot = sum(nk)
    a_norm = [np.sqrt(sum(np.sum(a * a) for a in row)) for row in p.constraints]
    c_norm = np.sqrt(sum(np.sum(c * c) for c in p.objective))
    b = p.rhs

    xi_x = max(10.0, np.sqrt(ntot) * max([(1 + abs(b[i])) / (1 + a_norm[i]) for i in range(m)], default=1.0))
    xi_s = max(10.0, np.sqrt(ntot), c_norm, max(a_norm, default=0.0))
    X = [xi_x * np.eye(s) for s in sizes]
    S = [xi_s * np.eye(s) for s in sizes]
    y = np.zeros(m)

    def a_op(blocks):
        return np.array([_inner(row, blocks) for row in p.constraints])

    def at_op(v):
        out = [np.zeros((s, s)) for s in sizes]
        for i, row in enumerate(p.constraints):
            for k, a in enumerate(row):
                out[k] += v[i] * a
        return out

    report = {}
    for it in range(1, max_iter + 1):
        rp = b - a_op(X)
        aty = at_op(y)
        Rd = [c - a - s for c, a, s in zip(p.objective, aty, S)]
        pobj = _inner(p.objective, X)
        dobj = float(b @ y)
        mu = sum(float(np.vdot(x, s)) for x, s in zip(X, S)) / max(ntot, 1)
        pres = np.linalg.norm(rp) / (1 + np.linalg.norm(b))
        dres = np.sqrt(sum(np.sum(r * r) for r in Rd)) / (1 + c_norm)
        gap = pobj - dobj
        report = dict(iterations=it - 1, primal_objective=pobj, dual_objective=dobj,
                      primal_residual=pres, dual_residual=dres, gap=gap)
        scale = max(abs(pobj), abs(dobj), 1e-300)
        if (pres <= tol_feas and dres <= tol_feas and abs(gap) <= tol_gap
                and (abs(gap) <= tol_gap * scale or mu * ntot <= 1e-15)):
            return X, y, S, it - 1

        # NT scaling per block
        Rs, Rinv, lam, W = [], [], [], []
        for x, s in zip(X, S):
            if x.size == 0:
                Rs.append(x); Rinv.append(x); lam.append(np.zeros(0)); W.append(x)
                continue
            try:
                lx, ls = _chol(x), _chol(s)
            except np.linalg.LinAlgError:
                raise SdpConvergenceError("iterate lost positive definiteness", report) from None
            u, l, vt = np.linalg.svd(ls.T @ lx)
            r = lx @ vt.T / np.sqrt(l)
            Rs.append(r)
            Rinv.append((u / np.sqrt(l)).T @ ls.T)
            lam.append(l)
            W.append(r @ r.T)

        M = np.empty((m, m))
        WAW = [[w @ a @ w for w, a in zip(W, row)] for row in p.constraints]
        for i in range(m):
            for j in range(i, m):
                M[i, j] = M[j, i] = _inner(p.constraints[i], WAW[j])
        try:
            cm = np.linalg.cholesky(M)
            solve_m = lambda v: np.linalg.solve(cm.T, np.linalg.solve(cm, v))
        except np.linalg.LinAlgError:
            solve_m = lambda v: np.linalg.lstsq(M, v, rcond=None)[0]
        WRdW = [w @ r @ w for w, r in zip(W, Rd)]
        a_wrdw = a_op(WRdW)

        def direction(eta):
            T = [e / ((l[:, None] + l[None, :]) / 2) for e, l in zip(eta, lam)]
            RTR = [r @ t @ r.T for r, t in zip(Rs, T)]
            dy = solve_m(rp - a_op(RTR) + a_wrdw)
            atdy = at_op(dy)
            dS = [rd - a for rd, a in zip(Rd, atdy)]
            dX = [rtr - w @ ds @ w for rtr, w, ds in zip(RTR, W, dS)]
            dX = [(d + d.T) / 2 for d in dX]
            return dX, dy, dS

        def steps(dX, dS):
            ap = min([_max_step(_chol(x), d) for x, d in zip(X, dX) if x.size], default=np.inf)
            ad = min([_max_step(_chol(s), d) for s, d in zip(S, dS) if s.size], default=np.inf)
            return ap, ad

        eta_a = [-np.diag(l * l) for l in lam]
        dXa, dya, dSa = direction(eta_a)
        ap, ad = steps(dXa, dSa)
        ap, ad = min(1.0, ap), min(1.0, ad)
        mu_a = sum(float(np.vdot(x + ap * dx, s + ad * ds))
                   for x, dx, s, ds in zip(X, dXa, S, dSa)) / max(ntot, 1)
        sigma = min(1.0, (mu_a / mu) ** 3) if mu > 0 else 0.0

        eta_c = []
        for l, r, ri, dx, ds in zip(lam, Rs, Rinv, dXa, dSa):
            if l.size == 0:
                eta_c.append(np.zeros((0, 0)))
                continue
            dxt = ri @ dx @ ri.T
            dst = r.T @ ds @ r
            cross = (dxt @ dst + dst @ dxt) / 2
            eta_c.append(sigma * mu * np.eye(l.size) - np.diag(l * l) - cross)
        dX, dy, dS = direction(eta_c)
        ap, ad = steps(dX, dS)
        ap, ad = min(1.0, 0.98 * ap), min(1.0, 0.98 * ad)
        X = [x + ap * d for x, d in zip(X, dX)]
        X = [(x + x.T) / 2 for x in X]
        S = [s + ad * d for s, d in zip(S, dS)]
        S = [(s + s.T) / 2 for s in S]
        y = y + ad * dy
        if max(ap, ad) < 1e-12:
            break
    raise SdpConvergenceError("interior-point iteration limit reached", report)


def solve_sdp(p: SdpProblem, tol_gap: float = 1e-9, tol_feas: float = 1e-9,
              max_iter: int = 100, reduce: bool = True) -> SdpSolution:
    """Minimize <C, X> over the block PSD cone subject to the equalities.

    Returns lifted primal blocks; the dual vector is indexed like the original
    constraints, with zeros on rows dropped as redundant.
    """
    if reduce:
        red, qs, keep = facial_reduction(p)
    else:
        red, qs, keep = p, [np.eye(s) for s in p.block_sizes], list(range(p.n_constraints))
    Xr, yr, _, iters = _ipm(red, tol_gap, tol_feas, max_iter)
    blocks = tuple(q @ x @ q.T for q, x in zip(qs, Xr))
    y = np.zeros(p.n_constraints)
    y[keep] = yr
    res = np.array([_inner(row, blocks) for row in p.constraints]) - p.rhs
    eigs = [np.linalg.eigvalsh(x)[0] for x in blocks if x.size]
    pobj = _inner(p.objective, blocks)
    dobj = float(red.rhs @ yr)
    aty = [np.zeros((s, s)) for s in red.block_sizes]
    for i, row in enumerate(red.constraints):
        for k, a in enumerate(row):
            aty[k] += yr[i] * a
    # dual slack of the reduced problem is PSD at optimum; measure its violation
    dres = 0.0
    for c, a in zip(red.objective, aty):
        if c.size:
            dres = max(dres, max(0.0, -np.linalg.eigvalsh(c - a)[0]))
    return SdpSolution(
        blocks=blocks,
        y=y,
        primal_objective=pobj,
        dual_objective=dobj,
        primal_residual=float(np.abs(res).max(initial=0.0)),
        dual_residual=float(dres),
        min_eigenvalue=float(min(eigs, default=0.0)),
        iterations=iters,
        reduced_sizes=red.block_sizes,
    )
