"""Bob's receiver in the Fock basis, plus closed-form pulse statistics.

The simulator propagates the full pure state of Eve's resent pulse through
the receiver: a loss beamsplitter (detector efficiency), the data/monitoring
split t_B, and the monitoring Mach-Zehnder whose long arm delays light by one
time bin. Threshold detectors click on any photon. The closed forms are the
expressions we compare against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

N_CUT = 5

# labels of the six single-coincidence click patterns of a double pulse;
# "~" negates, "m" stands for the monitoring pair (c, d) of that time bin
PATTERNS = (
    "b1,m1,~b2,~m2",
    "b1,m1,b2,~m2",
    "b1,m1,~b2,m2",
    "~b1,~m1,b2,m2",
    "b1,~m1,b2,m2",
    "~b1,m1,b2,m2",
)


class CutoffError(ValueError):
    pass


@dataclass(frozen=True)
class PhotonDistribution:
    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float).ravel()
        if p.size == 0 or np.any(p < 0) or abs(p.sum() - 1.0) > 1e-12:
            raise ValueError("photon-number probabilities must be nonnegative and sum to 1")
        object.__setattr__(self, "probs", p)

    @property
    def n_cut(self) -> int:
        return self.probs.size - 1

    @classmethod
    def fock(cls, n: int, n_cut: int = N_CUT) -> "PhotonDistribution":
        p = np.zeros(max(n_cut, n) + 1)
        p[n] = 1.0
        return cls(p)

    def moment(self, s: float) -> float:
        """Generating function sum_n p_n s^n."""
        return float(np.polynomial.polynomial.polyval(s, self.probs))


@dataclass(frozen=True)
class PulseStats:
    p_click: float
    p_coin: float
    p_single_click: float | None = None
    p_double_click: float | None = None
    p_single_coin: float | None = None
    p_double_coin: float | None = None
    patterns: dict = field(default_factory=dict)

    def as_vector(self) -> np.ndarray:
        vals = [self.p_click, self.p_coin]
        if self.p_single_click is not None:
            vals += [self.p_single_click, self.p_double_click, self.p_single_coin, self.p_double_coin]
            vals += [self.patterns[k] for k in PATTERNS]
        return np.array(vals)


# ---------------------------------------------------------------- simulator


class MultiModeFockState:
    """Sparse pure state: occupation tuple over ``modes`` -> amplitude."""

    def __init__(self, modes, amplitudes, n_cut=N_CUT):
        self.modes = tuple(modes)
        self.amplitudes = dict(amplitudes)
        self.n_cut = n_cut
        for occ in self.amplitudes:
            if len(occ) != len(self.modes):
                raise ValueError("occupation tuple length differs from mode count")
            if sum(occ) > n_cut:
                raise CutoffError(f"state holds {sum(occ)} photons, cutoff is {n_cut}")

    @classmethod
    def single_mode(cls, label, amplitudes, n_cut=N_CUT):
        amps = np.asarray(amplitudes, dtype=complex)
        if amps.size - 1 > n_cut and np.any(amps[n_cut + 1:] != 0):
            raise CutoffError("input support exceeds the photon cutoff")
        return cls((label,), {(n,): a for n, a in enumerate(amps) if a != 0}, n_cut)

    def index(self, label):
        try:
            return self.modes.index(label)
        except ValueError:
            raise KeyError(f"unknown mode {label!r}") from None

    def with_vacuum(self, *labels) -> "MultiModeFockState":
        for lab in labels:
            if lab in self.modes:
                raise ValueError(f"mode {lab!r} already present")
        pad = (0,) * len(labels)
        return MultiModeFockState(self.modes + tuple(labels),
                                  {occ + pad: a for occ, a in self.amplitudes.items()}, self.n_cut)

    def renamed(self, old, new) -> "MultiModeFockState":
        i = self.index(old)
        if new in self.modes:
            raise ValueError(f"mode {new!r} already present")
        modes = list(self.modes)
        modes[i] = new
        return MultiModeFockState(modes, self.amplitudes, self.n_cut)

    def norm2(self) -> float:
        return float(sum(abs(a) ** 2 for a in self.amplitudes.values()))

    def photon_numbers(self) -> set:
        return {sum(occ) for occ in self.amplitudes}

    def marginal(self, labels) -> dict:
        """Probabilities of the occupation pattern over ``labels``."""
        idx = [self.index(lab) for lab in labels]
        out = {}
        for occ, a in self.amplitudes.items():
            key = tuple(occ[i] for i in idx)
            out[key] = out.get(key, 0.0) + abs(a) ** 2
        return out


@lru_cache(maxsize=4096)
def _bs_table(na: int, nb: int, t: float, convention: str):
    """Output amplitudes {(ka, kb): c} of |na, nb> through the beamsplitter."""
    st, sr = math.sqrt(t), math.sqrt(1.0 - t)
    if convention == "real":
        a_coef = (st, sr)     # a+ -> st a+ + sr b+
        b_coef = (-sr, st)    # b+ -> -sr a+ + st b+
    elif convention == "symmetric":
        a_coef = (st, 1j * sr)
        b_coef = (1j * sr, st)
    else:
        raise ValueError(f"unknown phase convention {convention!r}")
    poly = {}
    for i in range(na + 1):
        ci = math.comb(na, i) * a_coef[0] ** i * a_coef[1] ** (na - i)
        for j in range(nb + 1):
            cj = math.comb(nb, j) * b_coef[0] ** j * b_coef[1] ** (nb - j)
            ka = i + j
            poly[ka] = poly.get(ka, 0.0) + ci * cj
    n = na + nb
    norm = 1.0 / math.sqrt(math.factorial(na) * math.factorial(nb))
    return tuple(((ka, n - ka), c * norm * math.sqrt(math.factorial(ka) * math.factorial(n - ka)))
                 for ka, c in sorted(poly.items()) if c != 0)


def apply_beamsplitter(state: MultiModeFockState, mode_a, mode_b, transmittance: float,
                       phase_convention: str = "real") -> MultiModeFockState:
    """Mix two modes. With the real convention a+ -> sqrt(T) a+ + sqrt(1-T) b+ and
    b+ -> -sqrt(1-T) a+ + sqrt(T) b+."""
    if not 0.0 <= transmittance <= 1.0:
        raise ValueError("transmittance must lie in [0, 1]")
    ia, ib = state.index(mode_a), state.index(mode_b)
    out = {}
    for occ, amp in state.amplitudes.items():
        for (ka, kb), c in _bs_table(occ[ia], occ[ib], float(transmittance), phase_convention):
            new = list(occ)
            new[ia], new[ib] = ka, kb
            key = tuple(new)
            out[key] = out.get(key, 0.0) + amp * c
    out = {k: v for k, v in out.items() if v != 0}
    return MultiModeFockState(state.modes, out, state.n_cut)


def _input_amplitudes(dist: PhotonDistribution, phases=None):
    amps = np.sqrt(dist.probs).astype(complex)
    if phases is not None:
        amps = amps * np.exp(1j * np.asarray(phases, dtype=float)[: amps.size])
    return amps


def _receiver(state: MultiModeFockState, bins, t_B, eta_det, last_bin):
    """Run every occupied input bin ``a<t>`` through loss, split and interferometer."""
    for t in bins:
        state = state.with_vacuum(f"e{t}")
        state = apply_beamsplitter(state, f"a{t}", f"e{t}", eta_det)
        state = state.with_vacuum(f"m{t}")
        state = apply_beamsplitter(state, f"a{t}", f"m{t}", t_B)
        state = state.renamed(f"a{t}", f"b{t}")
        # short arm keeps its bin, long arm moves to the next one
        state = state.with_vacuum(f"l{t}")
        state = apply_beamsplitter(state, f"m{t}", f"l{t}", 0.5)
        state = state.renamed(f"m{t}", f"s{t}")
        state = state.renamed(f"l{t}", f"long{t + 1}")
    for t in range(bins[0], last_bin + 1):
        have_s, have_l = f"s{t}" in state.modes, f"long{t}" in state.modes
        if not have_s:
            state = state.with_vacuum(f"s{t}")
        if not have_l:
            state = state.with_vacuum(f"long{t}")
        # c = (s - l)/sqrt2 is the port that stays dark for equal adjacent pulses
        state = apply_beamsplitter(state, f"s{t}", f"long{t}", 0.5)
        state = state.renamed(f"s{t}", f"c{t}").renamed(f"long{t}", f"d{t}")
        if f"b{t}" not in state.modes:
            state = state.with_vacuum(f"b{t}")
    return state


def _events(state, times):
    labels = []
    for t in times:
        labels += [f"b{t}", f"c{t}", f"d{t}"]
    probs = state.marginal(labels)
    out = {}
    for occ, p in probs.items():
        ev = []
        for i in range(len(times)):
            b, c, d = occ[3 * i: 3 * i + 3]
            ev.append((b > 0, c + d > 0))
        key = tuple(ev)
        out[key] = out.get(key, 0.0) + p
    return out


def simulate_individual(dist: PhotonDistribution, t_B: float, eta_det: float,
                        n_cut: int = N_CUT, phases=None) -> PulseStats:
    """Exact statistics of a lone resent pulse surrounded by vacuum."""
    if dist.n_cut > n_cut and np.any(dist.probs[n_cut + 1:] > 0):
        raise CutoffError("distribution support exceeds the simulator cutoff")
    st = MultiModeFockState.single_mode("a1", _input_amplitudes(dist, phases), n_cut)
    st = _receiver(st, [1], t_B, eta_det, last_bin=2)
    ev = _events(st, [1, 2])
    click = sum(p for e, p in ev.items() if e[0][0]) + sum(p for e, p in ev.items() if e[1][0])
    coin = sum(p for e, p in ev.items() if all(e[0])) + sum(p for e, p in ev.items() if all(e[1]))
    return PulseStats(p_click=click, p_coin=coin)


def simulate_double(dist: PhotonDistribution, t_B: float, eta_det: float,
                    n_cut: int = N_CUT, phases=None) -> PulseStats:
    """Exact statistics of two adjacent coherent pulses sharing one mode."""
    if dist.n_cut > n_cut and np.any(dist.probs[n_cut + 1:] > 0):
        raise CutoffError("distribution support exceeds the simulator cutoff")
    st = MultiModeFockState.single_mode("a1", _input_amplitudes(dist, phases), n_cut)
    # the joint mode (a1 + a2)/sqrt2 is split evenly over the two bins
    st = st.with_vacuum("a2")
    st = apply_beamsplitter(st, "a1", "a2", 0.5)
    st = _receiver(st, [1, 2], t_B, eta_det, last_bin=3)
    ev = _events(st, [1, 2, 3])

    def prob(pred):
        return sum(p for e, p in ev.items() if pred(e[0], e[1], e[2]))

    single_click = prob(lambda x, y, z: x[0] != y[0])
    double_click = prob(lambda x, y, z: x[0] and y[0])
    coin1 = lambda x: x[0] and x[1]
    single_coin = prob(lambda x, y, z: coin1(x) != coin1(y))
    double_coin = prob(lambda x, y, z: coin1(x) and coin1(y))
    patterns = {}
    for name in PATTERNS:
        want = []
        for tok in name.split(","):
            want.append((tok[-2], int(tok[-1]), not tok.startswith("~")))

        def pred(x, y, z, want=want):
            ev_t = {1: x, 2: y}
            for kind, t, val in want:
                got = ev_t[t][0] if kind == "b" else ev_t[t][1]
                if got != val:
                    return False
            return True

        patterns[name] = prob(pred)
    # third bin carries only monitoring light, so no data click can occur there
    return PulseStats(
        p_click=single_click + 2 * double_click,
        p_coin=single_coin + 2 * double_coin,
        p_single_click=single_click,
        p_double_click=double_click,
        p_single_coin=single_coin,
        p_double_coin=double_coin,
        patterns=patterns,
    )


# -------------------------------------------------------------- closed forms


def _terms(dist, eta, terms, const=0.0):
    """const + sum_n p_n sum_(w, x) w (1 - x eta)^n."""
    return const + sum(w * dist.moment(1.0 - x * eta) for w, x in terms)


def closed_individual(dist: PhotonDistribution, t_B: float, eta_det: float) -> PulseStats:
    t = t_B
    click = _terms(dist, eta_det, [(-1, t)], 1.0)
    coin = _terms(dist, eta_det, [(-1, (1 - t) / 2), (-1, t), (1, (1 + t) / 2)], 1.0)
    return PulseStats(p_click=click, p_coin=coin)


def double_pattern_terms(t: float) -> dict:
    """Closed-form coefficients of the six coincidence patterns."""
    return {
        "b1,m1,~b2,~m2": [(1, 0.5), (-1, (3 - t) / 4), (-1, (1 + t) / 2), (1, (3 + t) / 4)],
        "b1,m1,b2,~m2": [(1, (1 - t) / 2), (-2, 0.5), (-1, 3 * (1 - t) / 4), (2, (3 - t) / 4),
                         (1, (1 + t) / 2), (-1, (3 + t) / 4)],
        "b1,m1,~b2,m2": [(1, t / 2), (-1, 0.5), (-1, (1 + t) / 4), (1, (3 - t) / 4), (-1, t),
                         (1, (1 + t) / 2), (1, (1 + 3 * t) / 4), (-1, (3 + t) / 4)],
        "~b1,~m1,b2,m2": [(1, (1 + t) / 4), (-1, (3 - t) / 4), (-1, (1 + 3 * t) / 4), (1, (3 + t) / 4)],
        "b1,~m1,b2,m2": [(1, (1 - t) / 4), (-1, 3 * (1 - t) / 4), (-2, (1 + t) / 4), (2, (3 - t) / 4),
                         (1, (1 + 3 * t) / 4), (-1, (3 + t) / 4)],
        "~b1,m1,b2,m2": [(1, t / 2), (-1, 0.5), (-1, (1 + t) / 4), (1, (3 - t) / 4), (-1, t),
                         (1, (1 + t) / 2), (1, (1 + 3 * t) / 4), (-1, (3 + t) / 4)],
    }


def closed_double(dist: PhotonDistribution, t_B: float, eta_det: float) -> PulseStats:
    t, e = t_B, eta_det
    click = 2 * _terms(dist, e, [(-1, t / 2)], 1.0)
    coin = _terms(dist, e, [(1, 0.5), (-2, t / 2), (1, (1 + t) / 4), (-1, (1 - t) / 2),
                            (-1, (1 - t) / 4)], 2.0)
    single_click = 2 * _terms(dist, e, [(1, t / 2), (-1, t)])
    double_click = _terms(dist, e, [(-2, t / 2), (1, t)], 1.0)
    single_coin = _terms(dist, e, [(-3, 0.5), (4, (3 - t) / 4), (2, (1 + t) / 2), (-2, (3 + t) / 4),
                                   (-3, (1 + t) / 4), (2, (1 + 3 * t) / 4), (1, (1 - t) / 2),
                                   (-2, 3 * (1 - t) / 4), (2, t / 2), (-2, t), (1, (1 - t) / 4)])
    double_coin = _terms(dist, e, [(2, 0.5), (-2, (3 - t) / 4), (-1, (1 + t) / 2), (1, (3 + t) / 4),
                                   (2, (1 + t) / 4), (-1, (1 + 3 * t) / 4), (-1, (1 - t) / 2),
                                   (1, 3 * (1 - t) / 4), (-2, t / 2), (1, t), (-1, (1 - t) / 4)], 1.0)
    patterns = {k: _terms(dist, e, v) for k, v in double_pattern_terms(t).items()}
    return PulseStats(
        p_click=click,
        p_coin=coin,
        p_single_click=single_click,
        p_double_click=double_click,
        p_single_coin=single_coin,
        p_double_coin=double_coin,
        patterns=patterns,
    )


def closed_individual_vectors(t_B: float, eta_det: float, n_cut: int = N_CUT):
    """Per-photon-number (click, coin) coefficient vectors of a lone pulse."""
    n = np.arange(n_cut + 1)
    t, e = t_B, eta_det
    click = 1 - (1 - t * e) ** n
    coin = 1 - ((1 - (1 - t) * e / 2) ** n + (1 - e * t) ** n - (1 - (1 + t) * e / 2) ** n)
    return click, coin


def closed_double_vectors(t_B: float, eta_det: float, n_cut: int = N_CUT):
    """Per-photon-number (click, coin) coefficient vectors of a double pulse."""
    n = np.arange(n_cut + 1)
    t, e = t_B, eta_det
    click = 2 * (1 - (1 - t * e / 2) ** n)
    coin = 2 + ((1 - e / 2) ** n - 2 * (1 - t * e / 2) ** n + (1 - (1 + t) * e / 4) ** n
                - (1 - (1 - t) * e / 2) ** n - (1 - (1 - t) * e / 4) ** n)
    return click, coin
