import math
from dataclasses import replace

import numpy as np
import pytest

from cowlab import attack, bounds
from cowlab.params import channel_point, expected_coincidence_rate, expected_gain


@pytest.fixture(scope="module")
def coin_crossings(rows):
    return [bounds.crossing_coincidence(p) for p in rows]


def test_coincidence_crossing_consistency(rows, coin_crossings):
    for p, res in zip(rows, coin_crossings):
        eta = channel_point(p, res.l_zero_km).eta_sys
        assert expected_gain(p, eta) == pytest.approx(res.g_zero, rel=1e-9)
        assert res.witness.g_zero_coin == pytest.approx(expected_coincidence_rate(p, eta), rel=1e-3)
        assert res.attenuation_db == pytest.approx(-10 * math.log10(eta / p.eta_det))
        assert res.g_zero < attack.baseline_gain_zero(p)


def test_four_state_reach_definition(rows):
    res = bounds.four_state_reach(rows[0])
    assert res.attenuation_db == pytest.approx(rows[0].alpha_channel * res.l_zero_km)


def test_mu_max_bracket(rows):
    p = rows[0].with_eta_det(1.0)
    eta = 1e-4
    m = bounds.mu_max(rows[0], eta, "four-state")
    assert bounds.attack_blocked(replace(p, mu=m * (1 - 1e-3)), eta, "four-state")
    assert not bounds.attack_blocked(replace(p, mu=m * (1 + 1e-3)), eta, "four-state")
    assert bounds.mu_max(rows[0], 1.0, "four-state") <= bounds.MU_CAP


@pytest.mark.parametrize("variant", ["decoy", "four-state"])
def test_mu_max_nonincreasing_in_loss(rows, variant):
    etas = np.logspace(-1, -6, 10)
    mus = [bounds.mu_max(rows[0], e, variant) for e in etas]
    assert all(a >= b for a, b in zip(mus, mus[1:]))


def test_fit_exponent_exact_power_law():
    eta = np.logspace(-2, -8, 13)
    slope, win = bounds.fit_exponent(eta, 3.0 * eta ** (4 / 3))
    assert slope == pytest.approx(4 / 3, abs=1e-12)
    assert win == pytest.approx((-6.8, -3.2))


def test_upper_bound_curve_is_reproducible(rows):
    grid = np.logspace(-3, -5, 5)
    a = bounds.upper_bound_curve(rows[1], grid, "four-state")
    b = bounds.upper_bound_curve(rows[1], grid, "four-state")
    assert a.exponent == b.exponent
    assert np.all(np.diff(a.r_upp) < 0)
    with pytest.raises(ValueError):
        bounds.upper_bound_curve(rows[1], [2.0], "four-state")
