"""Acceptance criteria 1-9 at their stated tolerances.

Each test prints one PASS/FAIL line. Run alone with

    pytest tests/test_acceptance.py -v
"""

import math
import time

import numpy as np
import pytest

from cowlab import attack, bounds, fock, oracle
from cowlab.cli import load_references
from cowlab.params import ExperimentalParams
from cowlab.usd import branch_jumps, four_state_usd, three_state_usd

REFS = load_references()
ROWS = [
    ExperimentalParams(0.06, 0.155, 0.9, 0.22, 0.1625, f_d=0.1, f_v=0.055),
    ExperimentalParams(0.1, 0.155, 0.9, 0.27, 0.168, f_d=0.1, f_v=0.055),
]


def report(capsys, n, ok, detail):
    with capsys.disabled():
        print(f"\nCRITERION {n}: {'PASS' if ok else 'FAIL'} | {detail}")
    assert ok, detail


def _check_rows(table, kind, solve, time_limit):
    ref = REFS[table][kind]
    tol = ref["tolerance"]
    ok, parts = True, []
    t0 = time.perf_counter()
    for p in ROWS:
        res = solve(p)
        r = ref[format(p.mu, "g")]
        dl = abs(res.log10_g_zero - r["log10_g_zero"])
        dd = abs(res.l_zero_km - r["l_zero_km"])
        ok &= dl <= tol["log10_g_zero"] and dd <= tol["l_zero_km"]
        parts.append(f"mu={p.mu:g}: log10 G={res.log10_g_zero:.3f} (ref {r['log10_g_zero']}), "
                     f"L={res.l_zero_km:.1f} km (ref {r['l_zero_km']})")
    elapsed = time.perf_counter() - t0
    ok &= elapsed < time_limit
    return ok, "; ".join(parts) + f"; {elapsed:.1f} s (limit {time_limit} s)"


def test_criterion_1_baseline(capsys):
    ref = REFS["table3"]["attack"]
    t0 = time.perf_counter()
    vals = [math.log10(attack.baseline_gain_zero(p)) for p in ROWS]
    elapsed = time.perf_counter() - t0
    errs = [abs(v - ref[format(p.mu, "g")]["log10_g_zero"]) for v, p in zip(vals, ROWS)]
    ok = max(errs) <= ref["tolerance"]["log10_g_zero"] and elapsed < 1.0
    report(capsys, 1, ok, f"log10 G_zero = {vals[0]:.4f}, {vals[1]:.4f} (ref -2.62, -2.19, tol 0.01); "
                          f"{elapsed * 1e3:.1f} ms")


def test_criterion_2_coincidence(capsys):
    ok, detail = _check_rows("table3", "coincidence", bounds.crossing_coincidence, 30)
    report(capsys, 2, ok, detail)


def test_criterion_3_decoy_rate(capsys):
    ok, detail = _check_rows("table4", "decoy", bounds.crossing_decoy, 120)
    report(capsys, 3, ok, detail)


def test_criterion_4_four_state(capsys):
    t0 = time.perf_counter()
    four_state_usd(0.06, 0.1, 0.055)
    sdp_time = time.perf_counter() - t0
    ok, detail = _check_rows("table5", "four-state", bounds.four_state_reach, 10)
    ok &= sdp_time < 1.0
    report(capsys, 4, ok, detail + f"; SDP solve {sdp_time * 1e3:.0f} ms")


def test_criterion_5_scaling(capsys):
    lo, hi = REFS["exponent"]["low"], REFS["exponent"]["high"]
    grid = bounds.default_eta_grid()
    ok, parts = True, []
    for variant in ("decoy", "four-state"):
        c = bounds.upper_bound_curve(ROWS[0], grid, variant)
        w = c.in_window()
        between = bool(np.all(c.r_upp[w] < c.linear_reference()[w])
                       and np.all(c.r_upp[w] > c.quadratic_reference()[w]))
        ok &= lo <= c.exponent <= hi and between
        parts.append(f"{variant}: exponent {c.exponent:.3f} over log10 eta in "
                     f"[{c.fit_window[0]:.1f}, {c.fit_window[1]:.1f}], between references: {between}")
    report(capsys, 5, ok, "; ".join(parts) + f" (band [{lo}, {hi}])")


def test_criterion_6_fock_oracle(capsys):
    rng = np.random.default_rng(2024)
    grid = [(t, e) for t in (0.5, 0.9, 1.0) for e in (0.22, 0.27, 1.0)]
    worst = 0.0
    n = 540
    for i in range(n):
        support = int(rng.integers(1, 6))
        p = np.zeros(6)
        p[: support + 1] = rng.dirichlet(np.ones(support + 1))
        d = fock.PhotonDistribution(p / p.sum())
        t, e = grid[i % len(grid)]
        worst = max(worst,
                    np.abs(fock.simulate_individual(d, t, e).as_vector()
                           - fock.closed_individual(d, t, e).as_vector()).max(),
                    np.abs(fock.simulate_double(d, t, e).as_vector()
                           - fock.closed_double(d, t, e).as_vector()).max())
    report(capsys, 6, worst <= 1e-10, f"{n} seeded distributions, (t_B, eta_det) cycled over a 9-point grid, "
                                      f"max deviation {worst:.2e} over 12 components (tol 1e-10)")


def test_criterion_7_recursions(capsys):
    rng = np.random.default_rng(7)
    worst = {"eq6": 0.0, "decoy": 0.0, "four-state": 0.0}
    for _ in range(100):
        p0 = rng.uniform(0.02, 0.5)
        p2 = rng.uniform(0.0, 0.9)
        x = rng.dirichlet(np.ones(3))
        pg = (x[0] / 2, x[0] / 2, x[1], x[2])
        for k in range(2, 21):
            worst["eq6"] = max(worst["eq6"], abs(attack.p_click_three_state(k, p0, "closed")
                                                 - attack.p_click_three_state(k, p0, "recursion")))
            worst["decoy"] = max(worst["decoy"], abs(attack.p_click_decoy(k, p2, "closed")
                                                     - attack.p_click_decoy_recursive(k, p2)))
            worst["four-state"] = max(worst["four-state"], abs(attack.p_click_four_state(k, pg)
                                                               - attack.p_click_four_state(k, pg, "literal")))
    ok = max(worst.values()) <= 1e-12
    report(capsys, 7, ok, ", ".join(f"{k} {v:.1e}" for k, v in worst.items()) + " (k = 2..20, 100 inputs, tol 1e-12)")


def test_criterion_8_enumeration(capsys):
    rng = np.random.default_rng(8)
    worst = 0.0
    for _ in range(20):
        q0 = rng.uniform(0.02, 0.5)
        x = rng.dirichlet(np.ones(3))
        pg = (x[0] / 2, x[0] / 2, x[1], x[2])
        q = fock.PhotonDistribution(rng.dirichlet(np.ones(6)))
        d = fock.PhotonDistribution(rng.dirichlet(np.ones(6)))
        for k in (2, 3, 4):
            e3 = oracle.enumerate_block(k, (q0, q0, 1 - 2 * q0))
            e4 = oracle.enumerate_block(k, pg)
            coin = np.subtract(attack.coin_attack_stats(k, q, d, 0.9, 0.22),
                               oracle.enumerate_coin_stats(k, q, d, 0.9, 0.22))
            counts = oracle.enumerate_counts(k)
            table = attack.block_counts(k)
            worst = max(worst,
                        abs(attack.p_click_three_state(k, q0) - e3["clicks"]),
                        abs(attack.p_click_decoy(k, 1 - 2 * q0) - e3["decoy_clicks"]),
                        abs(attack.p_click_four_state(k, pg) - e4["clicks"]),
                        np.abs(coin).max(),
                        max(abs(counts.n_ind[t] - table.n_ind[t]) + abs(counts.n_double[t] - table.n_double[t])
                            for t in attack.TYPES))
        worst = max(worst, abs(oracle.enumerate_block(2, pg)["clicks"] - 2 * pg[0] * (1 - pg[2])))
    report(capsys, 8, worst <= 1e-12, f"k in {{2,3,4}}: clicks, decoy clicks, coincidences, counts, "
                                      f"p_click(2); max deviation {worst:.1e} (tol 1e-12)")


def test_criterion_9_usd(capsys):
    jump = max(max(branch_jumps(mu)) for mu in (0.06, 0.1))
    gaps = [four_state_usd(p.mu, p.f_d, p.f_v).info["relative_gap"] for p in ROWS]
    tiny = four_state_usd(0.06, 0.155 - 1e-6, 1e-6)
    gaps.append(tiny.info["relative_gap"])
    three = three_state_usd(0.06, 0.155).p_c
    parts = {
        "branch jumps <= 1e-9": jump <= 1e-9,
        "f_v -> 1e-6 p_c within 1e-4 of three-state": abs(tiny.p_c - three) <= 1e-4,
        "SDP relative gap <= 1e-7": max(gaps) <= 1e-7,
    }
    detail = (f"jump {jump:.1e}; p_c(f_v=1e-6) = {tiny.p_c:.6f} vs three-state {three:.6f}; "
              f"max gap {max(gaps):.1e}; failing: {[k for k, v in parts.items() if not v] or 'none'}")
    report(capsys, 9, all(parts.values()), detail)
