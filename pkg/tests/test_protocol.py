import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from shield.protocol import (
    EnergyLedger,
    LinkParams,
    ScanPolicy,
    charge,
    in_range,
    scan_interval,
    scan_latency,
    transfer_time,
)

POLICY = ScanPolicy()


def test_scan_interval_bounds():
    assert scan_interval(POLICY, 0.0) == 120.0
    assert scan_interval(POLICY, 1.0) == 10.0
    assert scan_interval(POLICY, 0.5) == pytest.approx(65.0)


@pytest.mark.parametrize("risk", [0.0, 0.3, 1.0])
def test_emergency_overrides_risk(risk):
    assert scan_interval(POLICY, risk, emergency_active=True) == 1.0


@given(st.floats(0, 1), st.floats(0, 1))
def test_scan_interval_monotone(a, b):
    lo, hi = sorted((a, b))
    assert scan_interval(POLICY, hi) <= scan_interval(POLICY, lo)


def test_policy_invariants():
    with pytest.raises(ValueError):
        ScanPolicy(i_min_s=200, i_max_s=100)
    with pytest.raises(ValueError):
        ScanPolicy(emergency_interval_s=20)
    with pytest.raises(ValueError):
        scan_interval(POLICY, 1.5)
    assert ScanPolicy.always_fast(POLICY) == ScanPolicy(10.0, 10.0, 1.0)


@pytest.mark.parametrize("d, expected", [(0, True), (50, True), (50.0001, False), (60, False)])
def test_in_range(d, expected):
    assert in_range(d) is expected


def test_negative_distance():
    with pytest.raises(ValueError):
        in_range(-1)


def test_scan_latency():
    rng = np.random.default_rng(5)
    draws = [scan_latency(25, rng) for _ in range(2000)]
    assert all(6.0 <= x <= 10.0 for x in draws)
    assert scan_latency(55, rng) is None
    a = scan_latency(10, np.random.default_rng(99))
    b = scan_latency(10, np.random.default_rng(99))
    assert a == b


def test_transfer_time_anchors():
    assert transfer_time(0, 184) == 7.0
    assert transfer_time(50, 184) == pytest.approx(7 + 0.06 * 50)
    assert transfer_time(50, 184) == pytest.approx(10.0)
    assert transfer_time(25, 92) == pytest.approx(8.5 / 2)
    assert transfer_time(51, 184) is None
    with pytest.raises(ValueError):
        transfer_time(10, 0)


def test_one_hop_mean_by_quadrature():
    # E[scan] + E[transfer] for d ~ U[0, 50], evaluated independently by quadrature
    link = LinkParams()
    scan_mean = integrate.quad(lambda s: s / 4.0, 6, 10)[0]
    xfer_mean = integrate.quad(lambda d: transfer_time(d) / 50.0, 0, 50)[0]
    total = scan_mean + xfer_mean
    assert total == pytest.approx(16.5, abs=1e-9)
    assert 15.0 <= total <= 20.0
    rng = np.random.default_rng(0)
    d = rng.uniform(0, 50, 5000)
    samples = np.array([scan_latency(x, rng, link) + transfer_time(x) for x in d])
    assert samples.mean() == pytest.approx(total, abs=0.1)
    assert samples.min() >= 13.0 and samples.max() <= 20.0


def test_energy_charges():
    ledger = EnergyLedger()
    for _ in range(3):
        charge(ledger, 1, "scan")
    assert ledger.energy(1) == 3.0
    charge(ledger, 2, "transfer", 184)
    assert ledger.energy(2) == pytest.approx(1.84)
    assert ledger.total() == pytest.approx(4.84)
    with pytest.raises(ValueError):
        charge(ledger, 1, "nap")


@given(st.lists(st.tuples(st.integers(0, 3), st.sampled_from(["scan", "transfer"]), st.integers(0, 500)),
                max_size=50), st.randoms())
def test_energy_order_independent(events, rnd):
    a, b = EnergyLedger(), EnergyLedger()
    for node, kind, n in events:
        charge(a, node, kind, n)
    shuffled = list(events)
    rnd.shuffle(shuffled)
    for node, kind, n in shuffled:
        charge(b, node, kind, n)
    expected = sum(1.0 if k == "scan" else 0.01 * n for _, k, n in events)
    assert a.total() == pytest.approx(b.total())
    assert a.total() == pytest.approx(expected)
