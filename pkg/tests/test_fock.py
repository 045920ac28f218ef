import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cowlab import fock
from cowlab.fock import (
    PATTERNS,
    CutoffError,
    MultiModeFockState,
    PhotonDistribution,
    apply_beamsplitter,
    closed_double,
    closed_double_vectors,
    closed_individual,
    closed_individual_vectors,
    simulate_double,
    simulate_individual,
)


def two_mode(n_a, n_b):
    return MultiModeFockState(("a", "b"), {(n_a, n_b): 1.0})


def test_hong_ou_mandel_dip():
    out = apply_beamsplitter(two_mode(1, 1), "a", "b", 0.5)
    probs = out.marginal(["a", "b"])
    assert probs.get((1, 1), 0.0) == pytest.approx(0.0, abs=1e-15)
    assert probs[(2, 0)] == pytest.approx(0.5)
    assert probs[(0, 2)] == pytest.approx(0.5)


@pytest.mark.parametrize("convention", ["real", "symmetric"])
def test_beamsplitter_preserves_norm_and_number(convention):
    rng = np.random.default_rng(0)
    amps = {(i, j): complex(*rng.normal(size=2)) for i in range(3) for j in range(3 - i)}
    nrm = math.sqrt(sum(abs(a) ** 2 for a in amps.values()))
    state = MultiModeFockState(("a", "b"), {k: v / nrm for k, v in amps.items()})
    out = apply_beamsplitter(state, "a", "b", 0.3, convention)
    assert out.norm2() == pytest.approx(1.0, abs=1e-14)
    for n in range(3):
        before = sum(abs(v) ** 2 for k, v in state.amplitudes.items() if sum(k) == n)
        after = sum(abs(v) ** 2 for k, v in out.amplitudes.items() if sum(k) == n)
        assert after == pytest.approx(before, abs=1e-14)


def test_single_photon_binomial_split():
    out = apply_beamsplitter(two_mode(3, 0), "a", "b", 0.2)
    for k in range(4):
        assert out.marginal(["a"])[(k,)] == pytest.approx(math.comb(3, k) * 0.2 ** k * 0.8 ** (3 - k))


def test_cutoff_errors():
    with pytest.raises(CutoffError):
        MultiModeFockState(("a",), {(6,): 1.0}, n_cut=5)
    with pytest.raises(CutoffError):
        simulate_individual(PhotonDistribution.fock(7, 7), 0.9, 0.22)


def test_distribution_validation():
    with pytest.raises(ValueError):
        PhotonDistribution([0.5, 0.6])
    with pytest.raises(ValueError):
        PhotonDistribution([-0.1, 1.1])


def test_single_photon_closed_forms():
    t, e = 0.9, 0.22
    one = PhotonDistribution.fock(1)
    assert closed_individual(one, t, e).p_click == pytest.approx(t * e)
    assert closed_individual(one, t, e).p_coin == pytest.approx(0.0, abs=1e-15)
    assert closed_double(one, t, e).p_click == pytest.approx(t * e)
    assert closed_double(one, t, e).p_coin == pytest.approx(0.0, abs=1e-15)


def test_vectors_match_closed_forms():
    rng = np.random.default_rng(5)
    for _ in range(20):
        d = PhotonDistribution(rng.dirichlet(np.ones(6)))
        t, e = rng.uniform(0.1, 1.0), rng.uniform(0.1, 1.0)
        ic, io = closed_individual_vectors(t, e)
        dc, do = closed_double_vectors(t, e)
        assert ic @ d.probs == pytest.approx(closed_individual(d, t, e).p_click, abs=1e-14)
        assert io @ d.probs == pytest.approx(closed_individual(d, t, e).p_coin, abs=1e-14)
        assert dc @ d.probs == pytest.approx(closed_double(d, t, e).p_click, abs=1e-14)
        assert do @ d.probs == pytest.approx(closed_double(d, t, e).p_coin, abs=1e-14)


def test_double_components_consistent():
    d = PhotonDistribution([0.1, 0.2, 0.3, 0.2, 0.1, 0.1])
    c = closed_double(d, 0.9, 0.27)
    assert c.p_click == pytest.approx(c.p_single_click + 2 * c.p_double_click, abs=1e-14)
    assert c.p_coin == pytest.approx(c.p_single_coin + 2 * c.p_double_coin, abs=1e-14)
    assert set(c.patterns) == set(PATTERNS)


def test_phases_do_not_matter():
    d = PhotonDistribution([0.2, 0.2, 0.2, 0.2, 0.1, 0.1])
    a = simulate_double(d, 0.9, 0.22).as_vector()
    b = simulate_double(d, 0.9, 0.22, phases=np.linspace(0, 3, 6)).as_vector()
    assert np.abs(a - b).max() < 1e-14


dists = st.lists(st.floats(0.0, 1.0), min_size=1, max_size=6).filter(lambda x: sum(x) > 1e-3)


@settings(max_examples=40, deadline=None)
@given(weights=dists, t_b=st.sampled_from([0.5, 0.9, 1.0]), eta=st.sampled_from([0.22, 0.27, 1.0]))
def test_simulator_matches_closed_forms(weights, t_b, eta):
    p = np.array(weights) / sum(weights)
    d = PhotonDistribution(p / p.sum())
    assert np.abs(simulate_individual(d, t_b, eta).as_vector()
                  - closed_individual(d, t_b, eta).as_vector()).max() <= 1e-10
    assert np.abs(simulate_double(d, t_b, eta).as_vector()
                  - closed_double(d, t_b, eta).as_vector()).max() <= 1e-10


@settings(max_examples=30, deadline=None)
@given(n=st.integers(0, fock.N_CUT), t_b=st.floats(0.05, 1.0), eta=st.floats(0.05, 1.0))
def test_fock_states_off_grid(n, t_b, eta):
    d = PhotonDistribution.fock(n)
    assert np.abs(simulate_double(d, t_b, eta).as_vector()
                  - closed_double(d, t_b, eta).as_vector()).max() <= 1e-10
