"""Where attack and honest statistics meet: crossing distances, the maximal
safe intensity and the resulting key-rate upper bound."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np

from cowlab import attack
from cowlab.optim import find_root
from cowlab.params import (
    ExperimentalParams,
    OutOfRangeError,
    channel_point,
    distance_for_gain,
    expected_coincidence_rate,
    expected_decoy_gain,
    expected_gain,
    expected_gain_four_state,
)

LOG_G_RANGE = (-10.0, -1.0)
N_SCAN = 200
MU_CAP = 2.0
MU_FLOOR = 1e-4
FIT_FRACTION = 0.6


class NoCrossingError(RuntimeError):
    pass


@dataclass(frozen=True)
class CrossingResult:
    g_zero: float
    attenuation_db: float
    l_zero_km: float
    witness: attack.AttackResult | None
    residual: float = 0.0

    @property
    def log10_g_zero(self) -> float:
        return math.log10(self.g_zero)


def _crossing_from_gain(params, g, gain_fn, witness, residual=0.0) -> CrossingResult:
    length = distance_for_gain(params, g, gain_fn)
    return CrossingResult(g, channel_point(params, length).attenuation_db, length, witness, residual)


def _eta_sys_for_gain(params, g, gain_fn=expected_gain):
    return channel_point(params, distance_for_gain(params, g, gain_fn)).eta_sys


def _scan(h, lo, hi, n):
    """Bracket of the sign change with the largest argument."""
    xs = np.linspace(lo, hi, n)
    vals = []
    for x in xs:
        try:
            vals.append(h(x))
        except OutOfRangeError:
            vals.append(math.nan)
    for i in range(n - 2, -1, -1):
        a, b = vals[i], vals[i + 1]
        if math.isfinite(a) and math.isfinite(b) and (a > 0) != (b > 0):
            return xs[i], xs[i + 1]
    raise NoCrossingError("attack and honest curves do not cross in the scanned range")


def coincidence_gap(params: ExperimentalParams, log_g: float) -> float:
    """Relative excess of the attack's minimal coincidence rate over the honest one."""
    g = 10.0 ** log_g
    eta = _eta_sys_for_gain(params, g)
    try:
        res = attack.minimize_coincidences(params, g)
    except attack.InfeasibleTargetError:
        return math.nan
    return res.g_zero_coin / expected_coincidence_rate(params, eta) - 1.0


def crossing_coincidence(params: ExperimentalParams, n_scan: int = N_SCAN) -> CrossingResult:
    lo, hi = _scan(lambda x: coincidence_gap(params, x), *LOG_G_RANGE, n_scan)
    lg = find_root(lambda x: coincidence_gap(params, x), lo, hi, tol=1e-10)
    g = 10.0 ** lg
    return _crossing_from_gain(params, g, expected_gain, attack.minimize_coincidences(params, g),
                               coincidence_gap(params, lg))


def honest_decoy_ratio(params: ExperimentalParams, eta_sys: float) -> float:
    return expected_decoy_gain(params, eta_sys) / expected_gain(params, eta_sys)


def decoy_gap(params: ExperimentalParams, log_g: float) -> float:
    """Relative excess of the attack's best decoy fraction over the honest one."""
    g = 10.0 ** log_g
    eta = _eta_sys_for_gain(params, g)
    try:
        res = attack.maximize_decoy_rate(params, g)
    except attack.InfeasibleTargetError:
        return -1.0
    return (res.g_zero_decoy / res.g_zero) / honest_decoy_ratio(params, eta) - 1.0


def crossing_decoy(params: ExperimentalParams, n_scan: int = N_SCAN) -> CrossingResult:
    lo, hi = _scan(lambda x: decoy_gap(params, x), *LOG_G_RANGE, n_scan)
    lg = find_root(lambda x: decoy_gap(params, x), lo, hi, tol=1e-8)
    g = 10.0 ** lg
    return _crossing_from_gain(params, g, expected_gain, attack.maximize_decoy_rate(params, g),
                               decoy_gap(params, lg))


def four_state_reach(params: ExperimentalParams) -> CrossingResult:
    g = attack.four_state_gain_zero(params)
    cfg = attack.AttackConfig("four-state")
    return _crossing_from_gain(params, g, expected_gain_four_state, attack.AttackResult(g, 0.0, 0.0, cfg))


# ------------------------------------------------------------ upper bound


@lru_cache(maxsize=4096)
def _four_state_g_zero(params: ExperimentalParams) -> float:
    return attack.four_state_gain_zero(params)


def attack_blocked(params: ExperimentalParams, eta_channel: float, variant: str) -> bool:
    """True when the zero-error attack cannot reproduce the honest statistics."""
    eta = eta_channel * params.eta_det
    if variant == "decoy":
        g = expected_gain(params, eta)
        try:
            res = attack.maximize_decoy_rate(params, g)
        except attack.InfeasibleTargetError:
            return True
        return res.g_zero_decoy / res.g_zero < honest_decoy_ratio(params, eta)
    if variant == "four-state":
        return expected_gain_four_state(params, eta) > _four_state_g_zero(params)
    raise ValueError(f"unknown variant {variant!r}")


def mu_max(params: ExperimentalParams, eta_channel: float, variant: str,
           mu_cap: float = MU_CAP, rel_tol: float = 1e-6) -> float:
    """Largest intensity (up to mu_cap) for which the attack stays blocked."""
    if not 0 < eta_channel <= 1:
        raise ValueError("eta_channel must lie in (0, 1]")
    base = params.with_eta_det(1.0)

    def blocked(mu):
        return attack_blocked(replace(base, mu=mu), eta_channel, variant)

    if blocked(mu_cap):
        return mu_cap
    if not blocked(MU_FLOOR):
        raise OutOfRangeError("attack succeeds at every intensity in the search bracket")
    return find_root(lambda m: 1.0 if blocked(m) else -1.0, MU_FLOOR, mu_cap, tol=rel_tol, log_scale=True)


def rate_prior(params: ExperimentalParams, variant: str) -> float:
    if variant == "four-state":
        return 1 - params.f_d - params.f_v
    return 1 - params.f


@dataclass(frozen=True)
class RateCurve:
    variant: str
    eta: np.ndarray
    mu_max: np.ndarray
    r_upp: np.ndarray
    exponent: float
    fit_window: tuple
    info: dict = field(default_factory=dict, compare=False)

    def _anchor(self):
        i = int(np.argmax(self.eta))
        return self.eta[i], self.r_upp[i]

    def linear_reference(self) -> np.ndarray:
        e0, r0 = self._anchor()
        return r0 * (self.eta / e0)

    def quadratic_reference(self) -> np.ndarray:
        e0, r0 = self._anchor()
        return r0 * (self.eta / e0) ** 2

    def in_window(self) -> np.ndarray:
        lo, hi = self.fit_window
        le = np.log10(self.eta)
        return (le >= lo - 1e-12) & (le <= hi + 1e-12)


def fit_window(log_eta, fraction: float = FIT_FRACTION) -> tuple[float, float]:
    """Central ``fraction`` of the log-eta range."""
    lo, hi = float(np.min(log_eta)), float(np.max(log_eta))
    pad = (1 - fraction) / 2 * (hi - lo)
    return lo + pad, hi - pad


def fit_exponent(eta, r_upp, fraction: float = FIT_FRACTION) -> tuple[float, tuple]:
    le = np.log10(np.asarray(eta, dtype=float))
    lr = np.log10(np.asarray(r_upp, dtype=float))
    win = fit_window(le, fraction)
    sel = (le >= win[0] - 1e-12) & (le <= win[1] + 1e-12)
    if sel.sum() < 2:
        raise ValueError("fit window holds fewer than two grid points")
    slope = np.polyfit(le[sel], lr[sel], 1)[0]
    return float(slope), win


def default_eta_grid(n: int = 13) -> np.ndarray:
    return np.logspace(-2, -8, n)


def upper_bound_curve(params: ExperimentalParams, eta_grid, variant: str,
                      fraction: float = FIT_FRACTION, mapper=map) -> RateCurve:
    eta = np.asarray(eta_grid, dtype=float)
    if eta.size == 0 or np.any((eta <= 0) | (eta > 1)):
        raise ValueError("eta grid must be a non-empty subset of (0, 1]")
    mus = np.array(list(mapper(_MuMax(params, variant), eta.tolist())))
    r = rate_prior(params, variant) * eta * mus
    slope, win = fit_exponent(eta, r, fraction)
    return RateCurve(variant, eta, mus, r, slope, win, info={"mu_cap": MU_CAP, "fit_fraction": fraction})


@dataclass(frozen=True)
class _MuMax:
    # picklable callable so grid points can go to a process pool
    params: ExperimentalParams
    variant: str

    def __call__(self, eta):
        return mu_max(self.params, eta, self.variant)
