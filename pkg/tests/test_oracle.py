import pytest

from cowlab import attack, oracle


@pytest.mark.parametrize("k", [2, 3, 4, 5, 6])
def test_enumerated_counts_match_table(k):
    e, b = oracle.enumerate_counts(k), attack.block_counts(k)
    assert e.n_ind == b.n_ind and e.n_double == b.n_double


def test_resend_edge_cases():
    # phi_1 phi_0: bright pulses at positions 1 and 2 form one double pulse
    assert oracle.resend((1, 0)) == oracle.BlockOutcome(2, 0, 0, 1)
    # phi_0 phi_1: no bright pulse between the two vacuum pulses
    assert oracle.resend((0, 1)) == oracle.BlockOutcome(0, 0, 0, 0)
    assert oracle.resend((2, 2)) == oracle.BlockOutcome(0, 0, 0, 0)
    assert oracle.resend((3, 2, 3)).decoy_clicks == 1


def test_report_is_deterministic():
    a = oracle.run_checks(1, 10, simulate=False)
    b = oracle.run_checks(1, 10, simulate=False)
    assert a == b
    assert all(dev <= 1e-10 for dev, _ in a.values())


def test_fault_injection_detected():
    rep = oracle.run_checks(2, 5, perturb=1e-6, simulate=False)
    assert any(dev > 1e-10 for dev, _ in rep.values())
    assert "FAIL" in oracle.format_report(rep, 1e-10)


def test_zero_cases_rejected():
    with pytest.raises(ValueError):
        oracle.run_checks(1, 0)
