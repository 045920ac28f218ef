import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cowlab import attack, oracle
from cowlab.fock import PhotonDistribution
from cowlab.usd import three_state_usd

# p(j|c) vectors with p(0|c) = p(1|c)
four_vectors = st.tuples(st.floats(0.0, 1.0), st.floats(0.0, 1.0), st.floats(0.0, 1.0)).filter(
    lambda x: sum(x) > 1e-3).map(lambda x: tuple(np.array([x[0] / 2, x[0] / 2, x[1], x[2]]) / sum(x)))


def test_block_counts_table():
    bc = attack.block_counts(2)
    assert bc.n_double == {(0, 0): 0.0, (0, 1): 1.0, (1, 0): 0.0, (1, 1): 0.0}
    assert attack.block_counts(3).n_double[(1, 0)] == 0.0
    assert all(v == 3.0 for v in attack.block_counts(7).n_ind.values())
    with pytest.raises(ValueError):
        attack.block_counts(1)


@pytest.mark.parametrize("k", range(3, 12))
def test_block_counts_pulse_accounting(k):
    # each signal of the resent sub-block carries one bright pulse
    bc = attack.block_counts(k)
    edges = {(0, 0): k - 1, (0, 1): k, (1, 0): k - 2, (1, 1): k - 1}
    for t, n in edges.items():
        assert bc.n_ind[t] + 2 * bc.n_double[t] == pytest.approx(n)


def test_block_counts_monte_carlo_k7():
    rng = np.random.default_rng(11)
    seqs = rng.integers(0, 2, size=(20000, 7))
    counts = np.array([oracle.resend(tuple(s)).n_ind for s in seqs])
    assert abs(counts.mean() - 3.0) < 3 * counts.std() / math.sqrt(len(counts))


def test_gain_weights_and_zero():
    w = attack.gain_weights(0.3, 10)
    assert w.size == 9
    assert attack.gain_zero(0.0, 10, lambda k: k - 1) == 0.0
    vals = [attack.gain_zero(p, 10, lambda k: k - 1) for p in np.linspace(0, 0.9, 10)]
    assert np.all(np.diff(vals) >= 0)


@pytest.mark.parametrize("mu,ref", [(0.06, -2.62), (0.1, -2.19)])
def test_baseline_table_values(rows, mu, ref):
    p = next(r for r in rows if r.mu == mu)
    assert math.log10(attack.baseline_gain_zero(p)) == pytest.approx(ref, abs=0.01)


def test_three_state_click_limits():
    for k in range(2, 15):
        assert attack.p_click_three_state(k, 0.5) == pytest.approx(k - 1)
    assert attack.p_click_three_state(2, 0.3) == pytest.approx(oracle.enumerate_block(2, (0.3, 0.3, 0.4))["clicks"])


def test_three_state_small_p0_is_stable():
    # exact rational value from enumeration stays accurate where the closed form cancels
    p0 = 1e-6
    exact = oracle.enumerate_block(4, (p0, p0, 1 - 2 * p0))["clicks"]
    assert attack.p_click_three_state(4, p0) == pytest.approx(exact, rel=1e-9)


@settings(max_examples=100, deadline=None)
@given(k=st.integers(2, 20), p0=st.floats(0.02, 0.5))
def test_three_state_closed_vs_recursion(k, p0):
    closed = attack.p_click_three_state(k, p0, "closed")
    rec = attack.p_click_three_state(k, p0, "recursion")
    assert abs(closed - rec) <= 1e-12 * max(1.0, rec)


@settings(max_examples=100, deadline=None)
@given(k=st.integers(2, 20), p2=st.floats(0.0, 0.95))
def test_decoy_closed_vs_recursion(k, p2):
    rec = attack.p_click_decoy_recursive(k, p2)
    assert abs(attack.p_click_decoy(k, p2, "closed") - rec) <= 1e-12 * max(1.0, rec)
    assert abs(attack.p_click_decoy(k, p2, "stable") - rec) <= 1e-12 * max(1.0, rec)


def test_decoy_examples():
    assert attack.p_click_decoy(1, 0.4) == 0.0
    assert all(attack.p_click_decoy(k, 0.0) == 0.0 for k in range(2, 10))
    assert abs(attack.p_click_decoy(15, 0.4) - attack.p_click_decoy_recursive(15, 0.4)) <= 1e-12


@settings(max_examples=100, deadline=None)
@given(k=st.integers(2, 20), pg=four_vectors)
def test_four_state_closed_vs_recursion(k, pg):
    p2 = pg[2]
    if not 1e-3 < p2 < 1 - 1e-3:
        return
    closed = attack.p_click_four_state(k, pg, "closed")
    assert abs(closed - attack.p_click_four_state(k, pg, "literal")) <= 1e-12 * max(1.0, closed)
    assert abs(closed - attack.p_click_four_state(k, pg, "recursion")) <= 1e-12 * max(1.0, closed)


@settings(max_examples=60, deadline=None)
@given(k=st.integers(2, 16), pg=four_vectors)
def test_four_state_components(k, pg):
    if not 1e-3 < pg[2] < 1 - 1e-3:
        return
    for first in (0, 1, 3):
        rec = attack.p_click_four_state_given_first(k, first, pg)
        assert abs(rec - attack.p_click_four_state_given_first_closed(k, first, pg)) <= 1e-12 * max(1, rec)
    assert attack.p_click_four_state_given_first(k, 3, pg) == attack.p_click_four_state_given_first(k, 0, pg)
    total = sum(pg[j] * attack.p_click_four_state_given_first(k, j, pg) for j in range(4))
    assert total == pytest.approx(attack.p_click_four_state(k, pg), abs=1e-12)


def test_four_state_limits():
    pg = (0.3, 0.3, 0.25, 0.15)
    assert attack.p_click_four_state(2, pg) == pytest.approx(2 * 0.3 * 0.75)
    for k in range(2, 12):
        assert attack.p_click_four_state(k, (0.5, 0.5, 0.0, 0.0)) == pytest.approx(k - 1)
    with pytest.raises(ValueError):
        attack.p_click_four_state(3, (0.3, 0.2, 0.3, 0.2))


def test_coin_stats_single_photons():
    one = PhotonDistribution.fock(1)
    click, coin = attack.coin_attack_stats(2, one, one, 0.9, 0.22)
    assert click == pytest.approx(0.75 * 0.9 * 0.22)
    assert coin == pytest.approx(0.0, abs=1e-15)


@pytest.mark.parametrize("k", range(2, 11))
def test_coin_stats_against_count_assembly(k):
    rng = np.random.default_rng(k)
    q = PhotonDistribution(rng.dirichlet(np.ones(6)))
    p = PhotonDistribution(rng.dirichlet(np.ones(6)))
    a = attack.coin_attack_stats(k, q, p, 0.9, 0.27)
    b = attack.coin_attack_stats_from_counts(k, q, p, 0.9, 0.27)
    assert a == pytest.approx(b, abs=1e-14)
    assert a[1] <= a[0]


def test_minimize_coincidences_basics(rows):
    p = rows[0]
    res = attack.minimize_coincidences(p, 0.0)
    assert res.g_zero_coin == pytest.approx(0.0, abs=1e-15)
    assert res.witness.q.probs[0] == pytest.approx(1.0)
    # single photons only: no coincidences for any reachable target
    click, _ = attack.coincidence_lp_vectors(p, n_cut=1)
    res = attack.minimize_coincidences(p, 0.9 * (click[1] + click[3]), n_cut=1)
    assert res.g_zero_coin == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(attack.InfeasibleTargetError):
        attack.minimize_coincidences(p, 0.5)


def test_minimize_coincidences_dominates_hand_picked(rows):
    p = rows[0]
    q = PhotonDistribution([0.0, 0.5, 0.5, 0.0, 0.0, 0.0])
    d = PhotonDistribution([0.0, 0.0, 0.5, 0.5, 0.0, 0.0])
    w = attack.gain_weights(three_state_usd(p.mu, p.f).p_c, p.m_max)
    stats = [attack.coin_attack_stats(k, q, d, p.t_B, p.eta_det) for k in range(2, p.m_max + 1)]
    g = float(sum(wk * s[0] for wk, s in zip(w, stats)))
    coin = float(sum(wk * s[1] for wk, s in zip(w, stats)))
    res = attack.minimize_coincidences(p, g)
    assert res.g_zero == pytest.approx(g, rel=1e-10)
    assert res.g_zero_coin <= coin * (1 + 1e-10)


def test_decoy_gains_examples(rows):
    p = rows[0]
    n = p.m_max - 1
    assert attack.decoy_attack_gains(p, 0.66, np.zeros(n))[:2] == (0.0, 0.0)
    g = attack.decoy_attack_gains(p, p.f, np.ones(n))
    assert g.g_zero_decoy == 0.0
    assert g.g_zero == pytest.approx(attack.baseline_gain_zero(p), rel=1e-12)
    mid = attack.decoy_attack_gains(p, 0.66, np.ones(n))
    assert mid.g_zero_decoy > 0
    assert mid.four_state_deviation <= 1e-15


def test_maximize_decoy_rate_dominance(rows):
    p = rows[0]
    g = 1e-8
    res = attack.maximize_decoy_rate(p, g)
    assert res.g_zero == pytest.approx(g, rel=1e-9)
    lo, hi = attack.zeta_window(p)
    for z in np.linspace(lo, hi, 15):
        r = attack.max_decoy_at_zeta(p, z, g)
        if r is not None:
            assert r[0] <= res.g_zero_decoy * (1 + 1e-9)


def test_inner_lp_matches_greedy(rows):
    # fractional knapsack: fill blocks by decoy-to-click ratio
    p = rows[1]
    c, d, _ = attack.decoy_block_vectors(p, 0.665)
    g = 0.3 * c.sum()
    best, _ = attack.max_decoy_at_zeta(p, 0.665, g)
    rem, val = g, 0.0
    for i in np.argsort(-d / c):
        t = min(1.0, rem / c[i])
        val += t * d[i]
        rem -= t * c[i]
    assert best == pytest.approx(val, rel=1e-12)


def test_attack_config_validation():
    with pytest.raises(ValueError):
        attack.AttackConfig("five-state")
    with pytest.raises(ValueError):
        attack.AttackConfig("three-state", q=PhotonDistribution.fock(1), p=PhotonDistribution.fock(1))
    with pytest.raises(ValueError):
        attack.AttackConfig("three-state+zeta", gammas=(0.5, 1.2))


@pytest.mark.parametrize("mu,ref", [(0.06, -5.66), (0.1, -4.79)])
def test_four_state_gain_zero(rows, mu, ref):
    p = next(r for r in rows if r.mu == mu)
    assert math.log10(attack.four_state_gain_zero(p)) == pytest.approx(ref, abs=0.05)
