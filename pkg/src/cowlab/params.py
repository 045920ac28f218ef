"""Experimental constants, loss channel and honest-party expected statistics."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, replace
from pathlib import Path
from typing import Callable

from cowlab.optim import find_root

CONFIG_KEYS = ("mu", "f", "f_d", "f_v", "t_B", "eta_det", "alpha_channel_db_per_km", "m_max")


class ConfigError(ValueError):
    pass


class OutOfRangeError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentalParams:
    mu: float
    f: float
    t_B: float
    eta_det: float
    alpha_channel: float
    m_max: int = 10
    f_d: float | None = None
    f_v: float | None = None

    def __post_init__(self):
        if not self.mu > 0:
            raise ConfigError("mu must be positive")
        if not 0 < self.f < 1:
            raise ConfigError("f must lie in (0, 1)")
        if not 0 < self.t_B <= 1:
            raise ConfigError("t_B must lie in (0, 1]")
        if not 0 < self.eta_det <= 1:
            raise ConfigError("eta_det must lie in (0, 1]")
        if self.alpha_channel < 0:
            raise ConfigError("alpha_channel must be nonnegative")
        if int(self.m_max) != self.m_max or self.m_max < 2:
            raise ConfigError("m_max must be an integer >= 2")
        object.__setattr__(self, "m_max", int(self.m_max))
        if (self.f_d is None) != (self.f_v is None):
            raise ConfigError("f_d and f_v must be given together")
        if self.f_d is not None:
            if not (self.f_d > 0 and self.f_v > 0):
                raise ConfigError("f_d and f_v must be positive")
            if abs(self.f_d + self.f_v - self.f) > 1e-12:
                raise ConfigError("f_d + f_v must equal f")

    @property
    def four_state(self) -> bool:
        return self.f_d is not None

    def with_eta_det(self, eta_det: float) -> "ExperimentalParams":
        return replace(self, eta_det=eta_det)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentalParams":
        unknown = set(data) - set(CONFIG_KEYS)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        missing = {"mu", "f", "t_B", "eta_det", "alpha_channel_db_per_km"} - set(data)
        if missing:
            raise ConfigError(f"missing config keys: {sorted(missing)}")
        for key, value in data.items():
            if value is not None and (isinstance(value, bool) or not isinstance(value, (int, float))):
                raise ConfigError(f"config key {key!r} must be numeric")
        return cls(
            mu=float(data["mu"]),
            f=float(data["f"]),
            t_B=float(data["t_B"]),
            eta_det=float(data["eta_det"]),
            alpha_channel=float(data["alpha_channel_db_per_km"]),
            m_max=data.get("m_max", 10),
            f_d=None if data.get("f_d") is None else float(data["f_d"]),
            f_v=None if data.get("f_v") is None else float(data["f_v"]),
        )

    def to_dict(self) -> dict:
        d = asdict(self)
        d["alpha_channel_db_per_km"] = d.pop("alpha_channel")
        return {k: d[k] for k in CONFIG_KEYS}


def load_config(path) -> list[ExperimentalParams]:
    """Read a JSON object or a list of objects into parameter sets."""
    try:
        raw = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    items = raw if isinstance(raw, list) else [raw]
    if not items or not all(isinstance(x, dict) for x in items):
        raise ConfigError("config must be an object or a non-empty list of objects")
    return [ExperimentalParams.from_dict(x) for x in items]


@dataclass(frozen=True)
class ChannelPoint:
    length_km: float
    eta_channel: float
    eta_sys: float

    @property
    def attenuation_db(self) -> float:
        return -10.0 * math.log10(self.eta_channel)


def channel_point(params: ExperimentalParams, length_km: float) -> ChannelPoint:
    if length_km < 0:
        raise ValueError("length must be nonnegative")
    eta_ch = 10.0 ** (-params.alpha_channel * length_km / 10.0)
    return ChannelPoint(length_km, eta_ch, eta_ch * params.eta_det)


def _one_minus_exp(x: float) -> float:
    return -math.expm1(-x)


def _check_eta(eta_sys):
    if not 0 <= eta_sys <= 1:
        raise ValueError("eta_sys must lie in [0, 1]")


def expected_gain(params: ExperimentalParams, eta_sys: float) -> float:
    _check_eta(eta_sys)
    x = eta_sys * params.t_B * params.mu
    f = params.f
    # 1 - (1-f)e^-x - f e^-2x written without cancellation
    return (1 - f) * _one_minus_exp(x) + f * _one_minus_exp(2 * x)


def expected_coincidence_rate(params: ExperimentalParams, eta_sys: float) -> float:
    _check_eta(eta_sys)
    mu, t, f = params.mu, params.t_B, params.f
    a = _one_minus_exp(eta_sys * t * mu)
    half = _one_minus_exp(eta_sys * (1 - t) * mu / 2)
    full = _one_minus_exp(eta_sys * (1 - t) * mu)
    return a / 4 * ((1 - f) * (3 + f) * half + (1 + 6 * f + f * f) * full)


def coincidence_cases(params: ExperimentalParams, eta_sys: float) -> dict:
    """Coincidence probability of each (signal, preceding pulse) pair with its weight.

    Keys are (j, l) with j the signal index and l = 0 for a preceding vacuum
    pulse, 1 for a preceding bright pulse.
    """
    mu, t, f = params.mu, params.t_B, params.f
    a = _one_minus_exp(eta_sys * t * mu)
    half = _one_minus_exp(eta_sys * (1 - t) * mu / 2)
    full = _one_minus_exp(eta_sys * (1 - t) * mu)
    priors = {0: (1 - f) / 2, 1: (1 - f) / 2, 2: f}
    before = {0: (1 - f) / 2, 1: (1 + f) / 2}
    prob = {
        (0, 0): a * half,
        (1, 0): a * half,
        (1, 1): a * half,
        (0, 1): a * full,
        (2, 1): 2 * a * full,
        (2, 0): a * (half + full),
    }
    return {key: (priors[key[0]] * before[key[1]], p) for key, p in prob.items()}


def expected_decoy_gain(params: ExperimentalParams, eta_sys: float) -> float:
    _check_eta(eta_sys)
    return params.f * _one_minus_exp(2 * eta_sys * params.t_B * params.mu)


def expected_gain_four_state(params: ExperimentalParams, eta_sys: float) -> float:
    if not params.four_state:
        raise ConfigError("four-state priors f_d and f_v are not set")
    _check_eta(eta_sys)
    x = params.mu * params.t_B * eta_sys
    return (1 - params.f_d - params.f_v) * _one_minus_exp(x) + params.f_d * _one_minus_exp(2 * x)


def distance_for_gain(params: ExperimentalParams, g_target: float,
                      gain_fn: Callable[[ExperimentalParams, float], float] = expected_gain) -> float:
    """Fiber length at which ``gain_fn`` drops to ``g_target``."""
    g0 = gain_fn(params, channel_point(params, 0.0).eta_sys)
    if g_target == g0:
        return 0.0
    if not 0 < g_target < g0:
        raise OutOfRangeError(f"target gain {g_target} outside (0, {g0})")
    if params.alpha_channel == 0:
        raise OutOfRangeError("lossless fiber never reaches the target gain")

    def h(length):
        return math.log(gain_fn(params, channel_point(params, length).eta_sys)) - math.log(g_target)

    hi = 1.0
    while h(hi) > 0:
        hi *= 2.0
        if hi > 1e7:
            raise OutOfRangeError("target gain unreachable")
    lo = 0.0 if hi == 1.0 else hi / 2
    return find_root(h, lo, hi, tol=1e-15 * hi)
