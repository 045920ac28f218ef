"""Brute-force checks of the per-block formulas and the Fock closed forms.

Block enumeration: every sequence of k identified signals is expanded into
its pulse train. Eve resends everything between the first and the last
identified vacuum pulse; other pulses are replaced by vacuum. A resent run of
one bright pulse is an individual pulse, a run of two is a double pulse.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass

import numpy as np

from cowlab import attack, fock

# time-ordered pulse pattern of each signal, 1 = bright
PULSES = {0: (1, 0), 1: (0, 1), 2: (1, 1), 3: (0, 0)}


@dataclass(frozen=True)
class BlockOutcome:
    clicks: int
    decoy_clicks: int
    n_ind: int
    n_double: int


def resend(seq) -> BlockOutcome:
    pulses = [b for s in seq for b in PULSES[s]]
    vac = [i for i, b in enumerate(pulses) if b == 0]
    if len(vac) < 2:
        return BlockOutcome(0, 0, 0, 0)
    lo, hi = vac[0], vac[-1]
    kept = [b if lo <= i <= hi else 0 for i, b in enumerate(pulses)]
    clicks = decoys = 0
    for j, s in enumerate(seq):
        if kept[2 * j] or kept[2 * j + 1]:
            clicks += 1
            decoys += s == 2
    runs = [len(list(g)) for b, g in itertools.groupby(kept) if b]
    return BlockOutcome(clicks, decoys, runs.count(1), runs.count(2))


def enumerate_block(k: int, probs) -> dict:
    """Exact expectations over all identified-signal sequences of length k."""
    out = {"clicks": 0.0, "decoy_clicks": 0.0}
    for seq in itertools.product(range(len(probs)), repeat=k):
        pr = math.prod(probs[s] for s in seq)
        if pr == 0:
            continue
        r = resend(seq)
        out["clicks"] += pr * r.clicks
        out["decoy_clicks"] += pr * r.decoy_clicks
    return out


def enumerate_counts(k: int) -> attack.BlockCounts:
    """Average pulse counts per (last, first) type over key-signal blocks."""
    n_ind, n_dbl = {}, {}
    for i, j in attack.TYPES:
        mids = list(itertools.product((0, 1), repeat=k - 2))
        res = [resend((j,) + m + (i,)) for m in mids]
        n_ind[(i, j)] = sum(r.n_ind for r in res) / len(res)
        n_dbl[(i, j)] = sum(r.n_double for r in res) / len(res)
    return attack.BlockCounts(k, n_ind, n_dbl)


def enumerate_coin_stats(k, q_dist, p_dist, t_B, eta_det):
    ind = fock.closed_individual(q_dist, t_B, eta_det)
    dbl = fock.closed_double(p_dist, t_B, eta_det)
    click = coin = 0.0
    for seq in itertools.product((0, 1), repeat=k):
        r = resend(seq)
        click += (r.n_ind * ind.p_click + r.n_double * dbl.p_click) / 2 ** k
        coin += (r.n_ind * ind.p_coin + r.n_double * dbl.p_coin) / 2 ** k
    return click, coin


# ------------------------------------------------------ randomized checks


def _random_dist(rng, n_cut=fock.N_CUT):
    support = int(rng.integers(1, n_cut + 1))
    p = np.zeros(n_cut + 1)
    p[: support + 1] = rng.dirichlet(np.ones(support + 1))
    return fock.PhotonDistribution(p / p.sum())


def _random_four(rng):
    x = rng.dirichlet(np.ones(3))
    return (x[0] / 2, x[0] / 2, x[1], x[2])


def run_checks(seed: int, n_cases: int, perturb: float = 0.0, simulate: bool = True) -> dict:
    """Maximum deviation of each formula family over seeded random cases.

    ``perturb`` adds a relative error to the closed forms (fault injection).
    Returns {family: (max_dev, worst_case)}.
    """
    if n_cases < 1:
        raise ValueError("n_cases must be >= 1")
    rng = np.random.default_rng(seed)
    report: dict = {}

    def record(family, dev, case):
        if family not in report or dev > report[family][0]:
            report[family] = (float(dev), case)

    bump = 1.0 + perturb
    for _ in range(n_cases):
        k = int(rng.integers(2, 21))
        p0 = float(rng.uniform(0.02, 0.5))
        p2 = float(rng.uniform(0.0, 0.9))
        pg = _random_four(rng)
        case = {"k": k, "p0": p0, "p2": p2, "p_given_c": list(pg)}
        record("three_state_click", abs(bump * attack.p_click_three_state(k, p0, "closed")
                                        - attack._four_state_recursion(k, p0, 1 - 2 * p0, 0.0)), case)
        record("decoy_click", abs(bump * attack.p_click_decoy(k, p2, "closed")
                                  - attack.p_click_decoy_recursive(k, p2)), case)
        record("four_state_click", abs(bump * attack.p_click_four_state(k, pg, "closed")
                                       - attack.p_click_four_state(k, pg, "literal")), case)

        ke = int(rng.integers(2, 5))
        q0 = float(rng.uniform(0.02, 0.5))
        probs3 = (q0, q0, 1 - 2 * q0)
        e3 = enumerate_block(ke, probs3)
        e4 = enumerate_block(ke, pg)
        ecase = {"k": ke, "probs3": list(probs3), "probs4": list(pg)}
        record("enumeration_click", max(
            abs(bump * attack.p_click_three_state(ke, q0) - e3["clicks"]),
            abs(bump * attack.p_click_four_state(ke, pg) - e4["clicks"])), ecase)
        record("enumeration_decoy", abs(bump * attack.p_click_decoy(ke, probs3[2]) - e3["decoy_clicks"]), ecase)

        if simulate:
            dist = _random_dist(rng)
            t_b = float(rng.choice([0.5, 0.9, 1.0]))
            eta = float(rng.choice([0.22, 0.27, 1.0]))
            fcase = {"probs": dist.probs.tolist(), "t_B": t_b, "eta_det": eta}
            si = fock.simulate_individual(dist, t_b, eta).as_vector()
            ci = fock.closed_individual(dist, t_b, eta).as_vector()
            sd = fock.simulate_double(dist, t_b, eta).as_vector()
            cd = fock.closed_double(dist, t_b, eta).as_vector()
            record("fock_individual", np.abs(bump * ci - si).max(), fcase)
            record("fock_double", np.abs(bump * cd - sd).max(), fcase)
    return report


def format_report(report: dict, tol: float) -> str:
    lines = []
    for fam in sorted(report):
        dev, case = report[fam]
        status = "ok" if dev <= tol else "FAIL"
        line = f"{fam:20s} max_dev={dev:.3e} {status}"
        if dev > tol:
            line += " case=" + json.dumps(case, sort_keys=True)
        lines.append(line)
    return "\n".join(lines)
