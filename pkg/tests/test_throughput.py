import math

import numpy as np
import pytest
from scipy.stats import binom

from mprlab.errors import DomainError
from mprlab.params import AccessMode, Binomial, FrameTiming, NetworkParams, Poisson, SlotDurations
from mprlab.throughput import (
    attempt_pmf,
    attempt_support,
    finite_stationarity_residual,
    delivery_ratio,
    optimal_attempt_rate,
    optimal_pt_finite,
    scaling_curve,
    simo_optimum,
    simo_rate,
    simo_throughput,
    slot_durations,
    stationarity_residual,
    throughput_asymptotic,
    throughput_finite,
)

R = 54e6
L = 8184.0
GOLDEN = (1 + math.sqrt(5)) / 2


def equal_slots():
    return SlotDurations.equal(L / R)


def net(N=50, M=1):
    return NetworkParams(N=N, M=M, R=R, L=L)


def test_attempt_pmf_examples():
    assert attempt_pmf(Binomial(N=2, p_t=0.5), 1) == pytest.approx(0.5)
    assert attempt_pmf(Binomial(N=7, p_t=0.0), 0) == 1.0
    assert attempt_pmf(Poisson(rate=1.0), 0) == pytest.approx(math.exp(-1.0))


def test_attempt_pmf_outside_support():
    assert attempt_pmf(Binomial(N=3, p_t=0.4), 4) == 0.0
    assert attempt_pmf(Binomial(N=3, p_t=0.4), -1) == 0.0
    assert attempt_pmf(Poisson(rate=2.0), -2) == 0.0


@pytest.mark.parametrize("model", [Binomial(N=30, p_t=0.2), Poisson(rate=3.5), Poisson(rate=40.0)])
def test_attempt_pmf_sums_to_one(model):
    total = sum(attempt_pmf(model, int(k)) for k in attempt_support(model))
    assert total == pytest.approx(1.0, abs=1e-11)


def test_slot_durations_non_carrier_sensing():
    d = slot_durations(AccessMode.NON_CARRIER_SENSING, net())
    assert d.is_equal
    assert d.t_idle == pytest.approx(151.555e-6, rel=1e-4)


def test_slot_durations_carrier_sensing():
    mac = FrameTiming().mac_timing()
    basic = slot_durations(AccessMode.BASIC, net(), mac)
    rts = slot_durations(AccessMode.RTS_CTS, net(), mac)
    assert basic.t_idle == pytest.approx(9e-6)
    assert rts.t_coll == pytest.approx(26e-6 + 160 / 6e6 + 28e-6 + 1e-6)
    assert rts.t_succ > basic.t_succ > basic.t_coll > rts.t_coll


def test_slot_durations_need_timing():
    with pytest.raises(DomainError):
        slot_durations(AccessMode.BASIC, net())


def test_slot_durations_reject_long_idle_slot():
    mac = FrameTiming(slot_time=1.0).mac_timing()
    with pytest.raises(DomainError, match="sigma < header"):
        slot_durations(AccessMode.BASIC, net(), mac)


def test_throughput_finite_two_stations():
    assert throughput_finite(net(N=2, M=1), 0.5, equal_slots()) == pytest.approx(0.5 * R)
    assert throughput_finite(net(N=2, M=2), 0.5, equal_slots()) == pytest.approx(1.0 * R)


def test_throughput_zero_attempts():
    assert throughput_finite(net(N=20, M=3), 0.0, equal_slots()) == 0.0
    assert throughput_asymptotic(3, 0.0, equal_slots(), L) == 0.0


def test_throughput_finite_rejects_bad_probability():
    with pytest.raises(DomainError):
        throughput_finite(net(), 1.2, equal_slots())


def test_throughput_asymptotic_examples():
    assert throughput_asymptotic(1, 1.0, equal_slots(), L) == pytest.approx(R * math.exp(-1.0), rel=1e-12)
    expected = R * GOLDEN * math.exp(-GOLDEN) * (1 + GOLDEN)
    assert throughput_asymptotic(2, GOLDEN, equal_slots(), L) == pytest.approx(expected, rel=1e-12)
    assert expected / R == pytest.approx(0.8399, abs=1e-4)


def test_finite_tends_to_asymptotic():
    for M in (1, 4, 8):
        lam = 0.9 * M
        fin = throughput_finite(net(N=10_000, M=M), lam / 10_000, equal_slots())
        inf = throughput_asymptotic(M, lam, equal_slots(), L)
        assert abs(fin - inf) / inf < 0.01


def test_delivery_ratio_matches_throughput():
    for M in (1, 3, 7):
        for lam in (0.5, 2.0, 6.0):
            s = throughput_asymptotic(M, lam, equal_slots(), L)
            assert s / (lam * R) == pytest.approx(delivery_ratio(M, lam), rel=1e-12)


def test_optimal_attempt_rate_classics():
    m1 = optimal_attempt_rate(1, equal_slots(), L)
    assert m1.rate == pytest.approx(1.0, abs=1e-6)
    assert m1.throughput / R == pytest.approx(math.exp(-1.0), abs=1e-6)
    rate, _ = optimal_attempt_rate(2, equal_slots(), L)
    assert rate == pytest.approx(GOLDEN, abs=1e-6)


def test_optimal_attempt_rate_stationary():
    for M in range(1, 7):
        rate, _ = optimal_attempt_rate(M, equal_slots(), L)
        assert abs(stationarity_residual(M, rate)) < 1e-8
        if M == 1:
            assert rate == pytest.approx(1.0, abs=1e-6)
        else:
            assert rate < M


def test_optimal_attempt_rate_trend():
    r2, _ = optimal_attempt_rate(2, equal_slots(), L)
    r10, _ = optimal_attempt_rate(10, equal_slots(), L)
    assert r10 < 10
    assert r10 / 10 > r2 / 2


@pytest.mark.parametrize("M", [1, 2, 5, 10])
def test_throughput_has_single_interior_maximum(M):
    lam = np.linspace(2 * M / 1024, 2 * M, 1024)
    s = np.array([throughput_asymptotic(M, x, equal_slots(), L) for x in lam])
    steps = np.sign(np.diff(s))
    assert steps[0] > 0
    assert np.count_nonzero(np.diff(steps[steps != 0])) == 1
    rate, _ = optimal_attempt_rate(M, equal_slots(), L)
    assert abs(rate - lam[np.argmax(s)]) <= lam[1] - lam[0]


def test_finite_throughput_has_single_maximum():
    n = net(N=50, M=4)
    p = np.linspace(1 / 1024, 1.0, 1024)
    s = np.array([throughput_finite(n, x, equal_slots()) for x in p])
    steps = np.sign(np.diff(s))
    assert np.count_nonzero(np.diff(steps[steps != 0])) == 1
    assert abs(optimal_pt_finite(n, equal_slots()).p_t - p[np.argmax(s)]) <= p[1] - p[0]


def test_optimal_pt_single_packet():
    best = optimal_pt_finite(net(N=10, M=1), equal_slots())
    assert best.p_t == pytest.approx(0.1, abs=1e-6)
    assert not best.degenerate


def test_optimal_pt_degenerate():
    best = optimal_pt_finite(net(N=2, M=2), equal_slots())
    assert best.degenerate
    assert best.p_t == 1.0
    assert best.throughput == pytest.approx(2 * R)


def test_optimal_pt_matches_grid_search():
    n = net(N=50, M=4)
    p = np.arange(1e-5, 1.0, 1e-5)
    k = np.arange(1, 5)
    grid = R * (k[:, None] * binom.pmf(k[:, None], 50, p[None, :])).sum(axis=0)
    best = optimal_pt_finite(n, equal_slots())
    assert best.throughput == pytest.approx(grid.max(), rel=1e-4)
    assert best.throughput >= grid.max() * (1 - 1e-12)
    assert finite_stationarity_residual(n, best.p_t) < 1e-6


def test_scaling_curve_asymptotic():
    points = scaling_curve(2, equal_slots(), net())
    assert [p.M for p in points] == [1, 2]
    assert points[0].normalized == pytest.approx(0.3679, abs=1e-4)
    assert points[1].normalized == pytest.approx(0.4199, abs=1e-4)


def test_scaling_curve_finite_super_linear():
    points = scaling_curve(10, equal_slots(), net(), finite_N=20)
    per_m = [p.per_M for p in points]
    assert all(b >= a * (1 - 1e-9) for a, b in zip(per_m, per_m[1:]))


def test_scaling_curve_rts_cts():
    timing = FrameTiming()
    base = net()
    points = scaling_curve(10, lambda M: slot_durations(AccessMode.RTS_CTS, base, timing.mac_timing(M)), base)
    per_m = [p.per_M for p in points[1:]]
    assert all(b >= a for a, b in zip(per_m, per_m[1:]))


def test_scaling_curve_preconditions():
    with pytest.raises(DomainError, match="M_max >= 2"):
        scaling_curve(1, equal_slots(), net())
    with pytest.raises(DomainError, match="M_max <= N"):
        scaling_curve(6, equal_slots(), net(), finite_N=5)


def test_simo_rate():
    assert simo_rate(1.0, 8) == pytest.approx(4.0)
    assert simo_rate(1.0, 1) == 1.0
    with pytest.raises(DomainError):
        simo_rate(1.0, 2, log_base=1.0)


def test_simo_single_antenna_is_plain_aloha():
    n = net(N=30, M=1)
    assert simo_throughput(n, 0.05, AccessMode.NON_CARRIER_SENSING) == pytest.approx(
        throughput_finite(n, 0.05, equal_slots())
    )


def test_simo_optimum_closed_form():
    for M in (1, 2, 4, 8):
        best = simo_optimum(NetworkParams(N=50, M=M, R=1.0, L=1.0), AccessMode.NON_CARRIER_SENSING)
        assert best.throughput == pytest.approx((1.0 + math.log2(M)) * math.exp(-1.0), rel=1e-9)


def test_simo_normalized_decreases():
    values = [
        simo_optimum(net(M=M), AccessMode.NON_CARRIER_SENSING).throughput / M for M in range(1, 9)
    ]
    assert all(b < a for a, b in zip(values, values[1:]))
