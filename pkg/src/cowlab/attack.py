"""Zero-error attack: block combinatorics, per-block click statistics and the
two countermeasure optimizers (coincidence minimization, decoy-rate matching).

A block is a run of k conclusive USD outcomes. Eve resends the longest
sub-block bounded by identified vacuum pulses. In the high-intensity limit
every resent non-vacuum pulse produces a data-line click.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from cowlab import fock
from cowlab.optim import LinearProgram, LpError, maximize_1d, solve_lp
from cowlab.params import ExperimentalParams
from cowlab.usd import UsdSolution, four_state_usd, three_state_usd, tunable_usd, zeta_boundaries

VARIANTS = ("three-state", "three-state+zeta", "four-state")
TYPES = ((0, 0), (0, 1), (1, 0), (1, 1))

# below these thresholds the closed forms lose digits to cancellation
_P0_STABLE = 1e-2
_P2_STABLE = (1e-3, 1 - 1e-3)


class InfeasibleTargetError(ValueError):
    pass


# ------------------------------------------------------------ block counts


@dataclass(frozen=True)
class BlockCounts:
    """Average individual / double pulse counts per block type.

    Type (i, j) means the k-th signal is |phi_i> and the first is |phi_j>.
    """

    k: int
    n_ind: dict
    n_double: dict

    def assemble(self, p_ind: float, p_double: float) -> float:
        """Per-block statistic averaged over the four equally likely types."""
        return 0.25 * sum(self.n_ind[t] * p_ind + self.n_double[t] * p_double for t in TYPES)


def block_counts(k: int) -> BlockCounts:
    if int(k) != k or k < 2:
        raise ValueError("k must be an integer >= 2")
    if k == 2:
        n_ind = {(0, 0): 1.0, (0, 1): 0.0, (1, 0): 0.0, (1, 1): 1.0}
        n_double = {(0, 0): 0.0, (0, 1): 1.0, (1, 0): 0.0, (1, 1): 0.0}
    else:
        n_ind = {t: (k - 1) / 2 for t in TYPES}
        n_double = {(0, 0): (k - 1) / 4, (0, 1): (k + 1) / 4, (1, 0): (k - 3) / 4, (1, 1): (k - 1) / 4}
    return BlockCounts(int(k), n_ind, n_double)


# ------------------------------------------------------------- gain shape


def gain_weights(p_c: float, m_max: int) -> np.ndarray:
    """Probability of a block of each length k = 2..m_max."""
    if not 0 <= p_c < 1:
        raise ValueError("p_c must lie in [0, 1)")
    if m_max < 2:
        raise ValueError("m_max must be >= 2")
    ks = np.arange(2, m_max + 1)
    w = np.where(ks < m_max, p_c ** ks * (1 - p_c), p_c ** m_max)
    return w * (1 - p_c) / (1 - p_c ** (m_max + 1))


def gain_zero(p_c: float, m_max: int, per_block: Callable[[int], float]) -> float:
    w = gain_weights(p_c, m_max)
    return float(sum(wk * per_block(k) for k, wk in zip(range(2, m_max + 1), w)))


# ------------------------------------------------------- click statistics


def _lin_minus_pow(n: int, x: float) -> float:
    """n x - 1 + (1 - x)^n, summed as a series when x is small."""
    if x > 0.1:
        return n * x - 1 + (1 - x) ** n
    total, term = 0.0, 1.0
    for j in range(1, n + 1):
        term *= -x * (n - j + 1) / j
        if j >= 2:
            total += term
    return total


def _four_state_recursion(k, p0, p2, p3):
    # 1 - p2 computed from the other probabilities to keep it exact near p2 = 1
    q = 2 * p0 + p3
    pcc = 1 - p3
    val = 2 * p0 * q
    for kk in range(3, k + 1):
        tail = -math.expm1((kk - 1) * math.log1p(-q)) if q < 1 else 1.0
        val = 2 * p0 * tail + _lin_minus_pow(kk - 1, q) * pcc + p2 * val
    return val


def p_click_three_state(k: int, p0_given_c: float, method: str = "auto") -> float:
    """Average clicks of a k-block when decoys are never identified."""
    if k < 2:
        raise ValueError("k must be >= 2")
    p = p0_given_c
    if not 0 < p <= 0.5:
        raise ValueError("p0_given_c must lie in (0, 1/2]")
    if method == "closed" or (method == "auto" and p >= _P0_STABLE):
        return (-1 + (k + 1) * p + (1 - 2 * p) ** k * (1 + (k - 1) * p)) / p
    return _four_state_recursion(k, p, 1 - 2 * p, 0.0)


def p_click_decoy(k: int, p2_given_c: float, method: str = "auto") -> float:
    """Average decoy clicks of a k-block."""
    p = p2_given_c
    if not 0 <= p < 1:
        raise ValueError("p2_given_c must lie in [0, 1)")
    if k < 2:
        return 0.0
    if p == 0:
        return 0.0
    if method == "closed" or (method == "auto" and p < 0.9):
        return p / (1 - p) * ((1 - p) * k - 2 + ((1 - p) * k + 2 * p) * p ** (k - 1))
    if method == "messi4":
        return p_click_decoy_recursive(k, p)
    # sum of nonnegative terms: first signal key-type or decoy
    inner = outer = 0.0
    for kk in range(2, k + 1):
        inner = ((1 - p) * (kk - 2) + inner) * p
        outer = (1 - p) * inner + p * outer
    return outer


def p_click_decoy_recursive(k: int, p2_given_c: float) -> float:
    p = p2_given_c
    val = 0.0
    for kk in range(2, k + 1):
        val = ((1 - p) * kk + p - 2 + val) * p + p ** kk
    return val


def _check_four(pg):
    pg = tuple(float(x) for x in pg)
    if len(pg) != 4 or min(pg) < 0 or abs(sum(pg) - 1) > 1e-12:
        raise ValueError("p_given_c must be a normalized 4-vector")
    if abs(pg[0] - pg[1]) > 1e-12:
        raise ValueError("p(0|c) and p(1|c) must be equal")
    return pg


def p_click_four_state(k: int, p_given_c, method: str = "auto") -> float:
    """Average clicks of a k-block in the four-state protocol."""
    if k < 2:
        raise ValueError("k must be >= 2")
    p0, _, p2, p3 = _check_four(p_given_c)
    pcc = 1 - p3
    if method == "recursion" or (method == "auto" and not _P2_STABLE[0] < p2 < _P2_STABLE[1]):
        return _four_state_recursion(k, p0, p2, p3)
    if method == "literal":
        val = 2 * p0 * (1 - p2)
        for kk in range(3, k + 1):
            val = 2 * p0 * (1 - p2 ** (kk - 1)) + (kk - 2 + (1 - kk) * p2 + p2 ** (kk - 1)) * pcc + p2 * val
        return val
    body = (-2 * p0 * p2
            + p2 ** k * (2 * p2 * (p0 - pcc) - k * (p2 - 1) * (2 * p0 - pcc))
            + (2 + k * (p2 - 1)) * p2 * pcc)
    return body / (p2 * (p2 - 1))


def p_click_four_state_given_first(k: int, first: int, p_given_c) -> float:
    """Clicks of a k-block whose first signal is |phi_first>, by recursion."""
    p0, p1, p2, p3 = _check_four(p_given_c)
    pcc = 1 - p3
    if first == 2:
        return 0.0 if k < 3 else p_click_four_state(k - 1, p_given_c)
    if k < 2:
        return 0.0
    val = 0.0
    for kk in range(2, k + 1):
        mid = (kk - 2) * pcc
        if first == 1:
            val = p0 * (2 + mid) + p1 * (1 + mid) + p2 * val + p3 * (1 + mid)
        else:
            val = p0 * (1 + mid) + p1 * mid + p2 * val + p3 * mid
    return val


def p_click_four_state_given_first_closed(k: int, first: int, p_given_c) -> float:
    p0, _, p2, p3 = _check_four(p_given_c)
    pcc = 1 - p3
    den = p2 * (p2 - 1)
    if first == 1:
        return ((1 - p0 - 2 * p2) * p2 ** k
                + p2 * (-1 - p0 + p2 + (2 + (k - 1) * p2 - k) * pcc)) / den
    if first in (0, 3):
        return ((p0 - pcc) * p2 ** k - p2 * (p0 + ((1 - k) * p2 + k - 2) * pcc)) / den
    raise ValueError("closed form given only for first signal 0, 1 or 3")


# ------------------------------------------------------ coincidence attack


def coin_attack_stats(k: int, q_dist, p_dist, t_B: float, eta_det: float) -> tuple[float, float]:
    """(p_click(k), p_coin(k)) with individual pulses drawn from q and doubles from p."""
    if k < 2:
        raise ValueError("k must be >= 2")
    ind = fock.closed_individual(q_dist, t_B, eta_det)
    dbl = fock.closed_double(p_dist, t_B, eta_det)
    c = (k - 1) / 2
    return c * (ind.p_click + dbl.p_click / 2), c * (ind.p_coin + dbl.p_coin / 2)


def coin_attack_stats_from_counts(k, q_dist, p_dist, t_B, eta_det):
    """Same statistics assembled type by type from the block-count table."""
    ind = fock.closed_individual(q_dist, t_B, eta_det)
    dbl = fock.closed_double(p_dist, t_B, eta_det)
    bc = block_counts(k)
    return bc.assemble(ind.p_click, dbl.p_click), bc.assemble(ind.p_coin, dbl.p_coin)


# ---------------------------------------------------------- configurations


@dataclass(frozen=True)
class AttackConfig:
    variant: str
    q: fock.PhotonDistribution | None = None
    p: fock.PhotonDistribution | None = None
    high_intensity: bool = True
    gammas: tuple | None = None
    zeta: float | None = None

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.high_intensity and (self.q is not None or self.p is not None):
            raise ValueError("high-intensity flag excludes explicit distributions")
        if not self.high_intensity and (self.q is None or self.p is None):
            raise ValueError("explicit distributions q and p are required")
        if self.gammas is not None:
            g = tuple(float(x) for x in self.gammas)
            if any(not 0 <= x <= 1 for x in g):
                raise ValueError("gamma_k must lie in [0, 1]")
            object.__setattr__(self, "gammas", g)


@dataclass(frozen=True)
class AttackResult:
    g_zero: float
    g_zero_coin: float
    g_zero_decoy: float
    witness: AttackConfig
    info: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        for name in ("g_zero", "g_zero_coin", "g_zero_decoy"):
            v = getattr(self, name)
            if not -1e-12 <= v <= 1 + 1e-12:
                raise ValueError(f"{name}={v} outside [0, 1]")
        tol = 1e-12 + 1e-9 * self.g_zero
        if self.g_zero_decoy > self.g_zero + tol or self.g_zero_coin > self.g_zero + tol:
            raise ValueError("partial gains exceed the total gain")


def baseline_gain_zero(params: ExperimentalParams) -> float:
    """Unconstrained three-state attack gain with high-intensity resending."""
    usd = three_state_usd(params.mu, params.f)
    return gain_zero(usd.p_c, params.m_max, lambda k: k - 1)


def coincidence_lp_vectors(params: ExperimentalParams, n_cut: int = fock.N_CUT):
    """Gain-weighted (click, coin) coefficients over (q_0..q_n, p_0..p_n)."""
    usd = three_state_usd(params.mu, params.f)
    w = gain_weights(usd.p_c, params.m_max)
    scale = sum(wk * (k - 1) / 2 for k, wk in zip(range(2, params.m_max + 1), w))
    ic, io = fock.closed_individual_vectors(params.t_B, params.eta_det, n_cut)
    dc, do = fock.closed_double_vectors(params.t_B, params.eta_det, n_cut)
    return scale * np.concatenate([ic, dc / 2]), scale * np.concatenate([io, do / 2])


def minimize_coincidences(params: ExperimentalParams, g_target: float,
                          n_cut: int = fock.N_CUT) -> AttackResult:
    """Smallest attack coincidence rate compatible with G_zero = g_target."""
    click, coin = coincidence_lp_vectors(params, n_cut)
    m = n_cut + 1
    if g_target < 0 or g_target > click[n_cut] + click[m + n_cut] * (1 + 1e-12):
        raise InfeasibleTargetError(f"g_target={g_target} not achievable")
    a = np.vstack([click, np.r_[np.ones(m), np.zeros(m)], np.r_[np.zeros(m), np.ones(m)]])
    lp = LinearProgram.nonneg(coin, a, [g_target, 1.0, 1.0])
    try:
        sol = solve_lp(lp)
    except LpError as exc:
        raise InfeasibleTargetError(str(exc)) from exc
    x = np.clip(sol.x, 0.0, None)
    q = fock.PhotonDistribution(x[:m] / x[:m].sum())
    p = fock.PhotonDistribution(x[m:] / x[m:].sum())
    cfg = AttackConfig("three-state", q=q, p=p, high_intensity=False)
    g_coin = max(float(coin @ x), 0.0)
    return AttackResult(float(click @ x), min(g_coin, float(click @ x)), 0.0, cfg,
                        info={"lp_iterations": sol.iterations, "backend": sol.backend})


# ------------------------------------------------------------ decoy attack


class DecoyGains(NamedTuple):
    g_zero: float
    g_zero_decoy: float
    four_state_deviation: float


def decoy_block_vectors(params: ExperimentalParams, zeta: float, usd: UsdSolution | None = None):
    """Weighted per-block (click, decoy click) vectors over k = 2..m_max."""
    usd = usd or tunable_usd(params.mu, params.f, zeta)
    if usd.p_c <= 0 or usd.q_s <= 0:
        z = np.zeros(params.m_max - 1)
        return z, z.copy(), usd
    p0, _, p2 = usd.p_given_c
    w = gain_weights(usd.p_c, params.m_max)
    ks = range(2, params.m_max + 1)
    clicks = np.array([wk * p_click_three_state(k, p0) for k, wk in zip(ks, w)])
    decoys = np.array([wk * p_click_decoy(k, p2) for k, wk in zip(ks, w)])
    return clicks, decoys, usd


def decoy_attack_gains(params: ExperimentalParams, zeta: float, gammas) -> DecoyGains:
    """Gains for block-forwarding probabilities gammas (k = 2..m_max).

    The deviation field compares against the four-state click formula with
    no vacuum signal; it vanishes because both count the same events.
    """
    g = np.asarray(gammas, dtype=float)
    if g.shape != (params.m_max - 1,) or np.any((g < 0) | (g > 1)):
        raise ValueError("gammas must be m_max - 1 values in [0, 1]")
    clicks, decoys, usd = decoy_block_vectors(params, zeta)
    dev = 0.0
    if usd.p_c > 0 and usd.q_s > 0:
        p0, _, p2 = usd.p_given_c
        w = gain_weights(usd.p_c, params.m_max)
        alt = np.array([wk * p_click_four_state(k, (p0, p0, p2, 0.0))
                        for k, wk in zip(range(2, params.m_max + 1), w)])
        dev = float(abs(g @ alt - g @ clicks))
    return DecoyGains(float(g @ clicks), float(g @ decoys), dev)


def zeta_window(params: ExperimentalParams) -> tuple[float, float]:
    """zeta range where both key and decoy signals can be identified."""
    z1, z2 = zeta_boundaries(params.mu)
    return max(params.f, z1), min(1.0, z2)


def _best_gammas(clicks, decoys, g_target):
    n = clicks.size
    lp = LinearProgram(decoys, clicks[None, :], [g_target], np.zeros(n), np.ones(n), maximize=True)
    return solve_lp(lp)


def max_decoy_at_zeta(params: ExperimentalParams, zeta: float, g_target: float):
    """Inner problem: best decoy gain at fixed zeta, or None if infeasible."""
    clicks, decoys, _ = decoy_block_vectors(params, zeta)
    if clicks.sum() < g_target or g_target <= 0:
        return None
    try:
        sol = _best_gammas(clicks, decoys, g_target)
    except LpError:
        return None
    return sol.objective, np.clip(sol.x, 0.0, 1.0)


def maximize_decoy_rate(params: ExperimentalParams, g_target: float,
                        grid_n: int = 64, refine_iters: int = 40) -> AttackResult:
    """Largest attack decoy gain with G_zero = g_target over zeta and gammas."""
    lo, hi = zeta_window(params)

    def value(z):
        r = max_decoy_at_zeta(params, z, g_target)
        return -math.inf if r is None else r[0]

    z_best, v_best = maximize_1d(value, lo, hi, grid_n=grid_n, refine_iters=refine_iters)
    if not math.isfinite(v_best):
        raise InfeasibleTargetError(f"g_target={g_target} not achievable at any zeta")
    _, gam = max_decoy_at_zeta(params, z_best, g_target)
    cfg = AttackConfig("three-state+zeta", gammas=tuple(gam), zeta=z_best)
    gains = decoy_attack_gains(params, z_best, gam)
    return AttackResult(gains.g_zero, 0.0, min(gains.g_zero_decoy, gains.g_zero), cfg,
                        info={"zeta_window": (lo, hi), "four_state_deviation": gains.four_state_deviation})


def max_decoy_gain_zero(params: ExperimentalParams, grid_n: int = 64) -> float:
    """Largest G_zero reachable inside the zeta window (all gammas one)."""
    lo, hi = zeta_window(params)
    _, v = maximize_1d(lambda z: float(decoy_block_vectors(params, z)[0].sum()), lo, hi, grid_n=grid_n)
    return v


# ------------------------------------------------------- four-state attack


def four_state_gain_zero(params: ExperimentalParams, usd: UsdSolution | None = None) -> float:
    if not params.four_state:
        raise ValueError("four-state priors f_d and f_v are not set")
    usd = usd or four_state_usd(params.mu, params.f_d, params.f_v)
    pg = usd.p_given_c
    # symmetrize the key-signal conditionals against solver round-off
    p0 = 0.5 * (pg[0] + pg[1])
    pg = (p0, p0, pg[2], max(1 - 2 * p0 - pg[2], 0.0))
    return gain_zero(usd.p_c, params.m_max, lambda k: p_click_four_state(k, pg))
