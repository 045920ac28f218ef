"""Unambiguous discrimination of the COW signal states.

Three solvers: the closed-form measurement for the three-state protocol, the
family that trades key-signal conclusiveness for decoy identification
(parameter zeta), and the four-state optimum posed as a semidefinite program.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from cowlab.optim import SdpError, SdpProblem, solve_sdp


@dataclass(frozen=True)
class UsdSolution:
    q_s: float
    q_s_d: float
    p_c: float
    p_given_c: tuple
    q_s_v: float | None = None
    info: dict = field(default_factory=dict, compare=False)

    def as_dict(self) -> dict:
        out = {"q_s": self.q_s, "q_s_d": self.q_s_d, "q_s_v": self.q_s_v,
               "p_c": self.p_c, "p_given_c": list(self.p_given_c)}
        out.update({k: v for k, v in self.info.items() if isinstance(v, (int, float, str))})
        return out


def _conditionals(priors, conclusive):
    weights = [p * q for p, q in zip(priors, conclusive)]
    pc = sum(weights)
    if pc <= 0:
        given = [0.0] * len(priors)
        given[0] = given[1] = 0.5
        return 0.0, tuple(given)
    return pc, tuple(w / pc for w in weights)


def in_three_state_regime(mu: float, f: float) -> bool:
    return math.sqrt(f / (2 * (1 - f))) <= math.exp(-mu / 2)


def three_state_usd(mu: float, f: float) -> UsdSolution:
    """Optimal USD of the three-state protocol; outside the usual regime this is
    the zeta-family member at zeta = f."""
    if not mu > 0 or not 0 < f < 1:
        raise ValueError("need mu > 0 and 0 < f < 1")
    if not in_three_state_regime(mu, f):
        return tunable_usd(mu, f, f)
    q_s = -math.expm1(-mu)
    pc, given = _conditionals(((1 - f) / 2, (1 - f) / 2, f), (q_s, q_s, 0.0))
    return UsdSolution(q_s=q_s, q_s_d=0.0, p_c=pc, p_given_c=given)


def zeta_for_root_xi(x: float) -> float:
    """zeta whose xi = zeta / (2(1 - zeta)) has square root x."""
    return 2 * x * x / (1 + 2 * x * x)


def zeta_boundaries(mu: float) -> tuple[float, float]:
    """zeta values where the tunable measurement changes branch."""
    return zeta_for_root_xi(math.exp(-mu / 2)), zeta_for_root_xi(math.cosh(mu / 2))


def _branch(mu, zeta, which):
    if zeta >= 1.0:
        return 0.0, math.tanh(mu / 2)
    xi = zeta / (2 * (1 - zeta))
    rx = math.sqrt(xi)
    if which == 1:
        return -math.expm1(-mu), 0.0
    if which == 2:
        q_s = 1 + math.exp(-mu) - 2 * math.exp(-mu / 2) * rx
        q_d = 1 - math.exp(-mu / 2) / rx
        return q_s, q_d
    return 0.0, math.tanh(mu / 2)


def tunable_usd(mu: float, f: float, zeta: float, check_boundary: bool = True) -> UsdSolution:
    """Measurement maximizing (1 - zeta) q_s + zeta q_s_d for the three signals."""
    if not f <= zeta <= 1:
        raise ValueError(f"zeta={zeta} outside [f, 1]")
    z1, z2 = zeta_boundaries(mu)
    if zeta >= 1.0:
        which = 3
    else:
        rx = math.sqrt(zeta / (2 * (1 - zeta)))
        which = 1 if rx <= math.exp(-mu / 2) else (2 if rx <= math.cosh(mu / 2) else 3)
    q_s, q_d = _branch(mu, zeta, which)
    if check_boundary and zeta in (z1, z2):
        other = _branch(mu, zeta, 2 if which != 2 else (1 if zeta == z1 else 3))
        if max(abs(q_s - other[0]), abs(q_d - other[1])) > 1e-9:
            raise AssertionError("tunable USD branches disagree at a boundary")
    q_s = min(max(q_s, 0.0), 1.0)
    q_d = min(max(q_d, 0.0), 1.0)
    pc, given = _conditionals(((1 - f) / 2, (1 - f) / 2, f), (q_s, q_s, q_d))
    return UsdSolution(q_s=q_s, q_s_d=q_d, p_c=pc, p_given_c=given, info={"branch": which})


def branch_jumps(mu: float) -> tuple[float, float]:
    """Largest jump in (q_s, q_s_d) across each branch boundary."""
    out = []
    for zb, pair in zip(zeta_boundaries(mu), ((1, 2), (2, 3))):
        a, b = _branch(mu, zb, pair[0]), _branch(mu, zb, pair[1])
        out.append(max(abs(a[0] - b[0]), abs(a[1] - b[1])))
    return tuple(out)


# ------------------------------------------------------------- four states


@dataclass(frozen=True)
class StateVectors4:
    vectors: np.ndarray  # rows are |phi_0> .. |phi_3>

    def gram(self) -> np.ndarray:
        return self.vectors @ self.vectors.T


def build_four_state_vectors(mu: float) -> StateVectors4:
    if not mu > 0:
        raise ValueError("mu must be positive")
    e = math.exp(-mu)
    h = math.exp(-mu / 2)
    s = math.sqrt(-math.expm1(-2 * mu))
    r = -math.expm1(-mu) / s
    v = np.array([
        [1.0, 0.0, 0.0, 0.0],
        [e, s, 0.0, 0.0],
        [h, h * r, r, 0.0],
        [h, h * r, -e * r, -math.expm1(-mu)],
    ])
    return StateVectors4(v)


def gell_mann_basis(n: int) -> list[np.ndarray]:
    """Identity, then symmetric, antisymmetric and diagonal generators, all with
    Tr(s_k s_l) = n delta_kl."""
    if n < 2:
        raise ValueError("n must be at least 2")
    c = math.sqrt(n / 2)
    mats = [np.eye(n, dtype=complex)]
    pairs = list(combinations(range(n), 2))
    for p, q in pairs:
        m = np.zeros((n, n), dtype=complex)
        m[p, q] = m[q, p] = c
        mats.append(m)
    for p, q in pairs:
        m = np.zeros((n, n), dtype=complex)
        m[p, q] = -1j * c
        m[q, p] = 1j * c
        mats.append(m)
    for d in range(1, n):
        diag = np.zeros(n)
        diag[:d] = 1.0
        diag[d] = -d
        mats.append(np.diag(diag).astype(complex) * math.sqrt(n / (d * (d + 1))))
    return mats


def expansion_coefficients(op: np.ndarray, basis) -> np.ndarray:
    """Real coefficients c_k of a Hermitian operator, op = sum_k c_k sigma_k."""
    n = op.shape[0]
    return np.array([np.trace(op @ s).real / n for s in basis])


def _usd_problem(vecs: np.ndarray, weights):
    """USD SDP over the real symmetric POVM elements E_0..E_m (E_m inconclusive).

    The signal vectors are real, so imaginary parts of the POVM can be dropped
    without loss. Signal coefficients are Gell-Mann expansion coefficients.
    """
    m, n = vecs.shape
    basis = gell_mann_basis(n)
    real_idx = [k for k, s in enumerate(basis) if np.allclose(s.imag, 0)]
    phi = np.array([expansion_coefficients(np.outer(v, v), basis) for v in vecs])

    def from_coeffs(coeffs):
        # sum_k coeffs_k sigma_k over the real generators
        return sum(coeffs[k] * basis[k].real for k in real_idx)

    zero = np.zeros((n, n))
    nb = m + 1
    # p_{j|j} = Tr(E_j rho_j) = n sum_k phi_jk e_jk
    objective = [-w * from_coeffs(phi[j]) for j, w in enumerate(weights)] + [zero]
    constraints, rhs = [], []
    # completeness, one row per real generator: sum_j e_jk = delta_k0
    for k in real_idx:
        constraints.append([basis[k].real / n] * nb)
        rhs.append(1.0 if k == 0 else 0.0)
    # unambiguity p_{j|i} = 0 for i != j
    for j in range(m):
        for i in range(m):
            if i != j:
                row = [zero] * nb
                row[j] = from_coeffs(phi[i])
                constraints.append(row)
                rhs.append(0.0)
    # equal success on the two key signals
    row = [zero] * nb
    row[0] = from_coeffs(phi[0])
    row[1] = -from_coeffs(phi[1])
    constraints.append(row)
    rhs.append(0.0)
    return SdpProblem((n,) * nb, tuple(objective), tuple(tuple(r) for r in constraints), np.array(rhs))


def four_state_problem(mu: float, f_d: float, f_v: float) -> SdpProblem:
    """SDP of the four-state USD (5 blocks of 4x4)."""
    vecs = build_four_state_vectors(mu).vectors
    return _usd_problem(vecs, (1 - f_d - f_v, 0.0, f_d, f_v))


def _solve_usd(vecs, priors, weights):
    sol = solve_sdp(_usd_problem(vecs, weights))
    if sol.primal_residual > 1e-8 or sol.min_eigenvalue < -1e-8:
        raise SdpError(f"USD SDP returned an infeasible point "
                       f"(residual {sol.primal_residual:.2e}, min eig {sol.min_eigenvalue:.2e})")
    m = len(vecs)
    p_ji = np.array([[float(v @ E @ v) for E in sol.blocks[:m]] for v in vecs])  # [i, j]
    q = [min(max(p_ji[i, i], 0.0), 1.0) for i in range(m)]
    q_s = 0.5 * (q[0] + q[1])
    pc, given = _conditionals(priors, (q_s, q_s) + tuple(q[2:]))
    off = p_ji - np.diag(np.diag(p_ji))
    info = {
        "primal_objective": -sol.primal_objective,
        "dual_objective": -sol.dual_objective,
        "relative_gap": sol.relative_gap,
        "max_cross_probability": float(np.abs(off).max()),
        "iterations": sol.iterations,
        "povm": sol.blocks,
    }
    return q, q_s, pc, given, info


def four_state_usd(mu: float, f_d: float, f_v: float) -> UsdSolution:
    """Optimal USD of the four-state protocol."""
    if not (mu > 0 and f_d > 0 and f_v > 0 and f_d + f_v < 1):
        raise ValueError("invalid four-state priors")
    vecs = build_four_state_vectors(mu).vectors
    priors = ((1 - f_d - f_v) / 2, (1 - f_d - f_v) / 2, f_d, f_v)
    q, q_s, pc, given, info = _solve_usd(vecs, priors, (1 - f_d - f_v, 0.0, f_d, f_v))
    return UsdSolution(q_s=q_s, q_s_d=q[2], q_s_v=q[3], p_c=pc, p_given_c=given, info=info)


def three_state_usd_sdp(mu: float, f: float) -> UsdSolution:
    """Three-state optimum from the same SDP machinery (vacuum signal absent)."""
    vecs = build_four_state_vectors(mu).vectors[:3, :3]
    priors = ((1 - f) / 2, (1 - f) / 2, f)
    q, q_s, pc, given, info = _solve_usd(vecs, priors, (1 - f, 0.0, f))
    return UsdSolution(q_s=q_s, q_s_d=q[2], p_c=pc, p_given_c=given, info=info)
