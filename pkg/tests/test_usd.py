import math

import numpy as np
import pytest

from cowlab.optim import solve_sdp
from cowlab.usd import (
    branch_jumps,
    build_four_state_vectors,
    expansion_coefficients,
    four_state_problem,
    four_state_usd,
    gell_mann_basis,
    in_three_state_regime,
    three_state_usd,
    three_state_usd_sdp,
    tunable_usd,
    zeta_boundaries,
)


def coherent_inner(a, b, mu):
    # <phi_a|phi_b> for two-pulse signals, pulse amplitudes in {0, sqrt(mu)}
    pa, pb = [(1, 0), (0, 1), (1, 1), (0, 0)][a], [(1, 0), (0, 1), (1, 1), (0, 0)][b]
    return math.prod(math.exp(-mu * (x - y) ** 2 / 2) for x, y in zip(pa, pb))


@pytest.mark.parametrize("mu", [0.06, 0.1, 1.0])
def test_vectors_reproduce_gram_matrix(mu):
    g = build_four_state_vectors(mu).gram()
    ref = np.array([[coherent_inner(a, b, mu) for b in range(4)] for a in range(4)])
    assert np.abs(g - ref).max() < 1e-14


def test_gell_mann_orthogonality_and_expansion():
    basis = gell_mann_basis(4)
    assert len(basis) == 16
    gram = np.array([[np.trace(a @ b).real for b in basis] for a in basis])
    assert np.abs(gram - 4 * np.eye(16)).max() < 1e-12
    rng = np.random.default_rng(1)
    h = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    h = h + h.conj().T
    c = expansion_coefficients(h, basis)
    assert np.abs(sum(ck * s for ck, s in zip(c, basis)) - h).max() < 1e-12


def test_three_state_closed_form():
    sol = three_state_usd(0.1, 0.155)
    assert sol.q_s == pytest.approx(1 - math.exp(-0.1))
    assert sol.p_c == pytest.approx(0.845 * (1 - math.exp(-0.1)))
    assert sol.p_given_c == pytest.approx((0.5, 0.5, 0.0))
    assert in_three_state_regime(0.1, 0.155)
    assert not in_three_state_regime(2.0, 0.3)


@pytest.mark.parametrize("mu", [0.06, 0.1, 0.5, 2.0])
def test_tunable_branch_continuity(mu):
    assert max(branch_jumps(mu)) <= 1e-9
    z1, z2 = zeta_boundaries(mu)
    for z in (z1, z2):
        tunable_usd(mu, min(0.155, z1), z)   # raises if branches disagree


def test_tunable_extremes():
    mu, f = 0.06, 0.155
    assert tunable_usd(mu, f, f).q_s_d == 0.0
    top = tunable_usd(mu, f, 1.0)
    assert top.q_s == 0.0 and top.q_s_d == pytest.approx(math.tanh(mu / 2))
    with pytest.raises(ValueError):
        tunable_usd(mu, f, 0.1)


@pytest.mark.parametrize("mu,f", [(0.06, 0.155), (0.1, 0.155), (0.5, 0.2), (2.0, 0.3)])
def test_sdp_reproduces_three_state_optimum(mu, f):
    sdp = three_state_usd_sdp(mu, f)
    ref = three_state_usd(mu, f)
    assert sdp.p_c == pytest.approx(ref.p_c, abs=1e-8)
    assert sdp.info["relative_gap"] <= 1e-7


@pytest.mark.parametrize("mu,pc", [(0.06, 0.0014758), (0.1, 0.0040173)])
def test_four_state_usd(mu, pc):
    sol = four_state_usd(mu, 0.1, 0.055)
    assert sol.p_c == pytest.approx(pc, rel=1e-4)
    assert sol.info["relative_gap"] <= 1e-7
    assert sol.info["max_cross_probability"] <= 1e-8
    assert sum(sol.p_given_c) == pytest.approx(1.0)


def test_four_state_reduction_shape():
    sol = solve_sdp(four_state_problem(0.06, 0.1, 0.055))
    assert sorted(sol.reduced_sizes) == [1, 1, 1, 1, 4]


def test_four_state_vacuum_prior_does_not_restore_three_state():
    # the vacuum signal must stay unambiguous for any f_v > 0
    tiny = four_state_usd(0.06, 0.155 - 1e-6, 1e-6)
    assert tiny.p_c < 0.1 * three_state_usd(0.06, 0.155).p_c
