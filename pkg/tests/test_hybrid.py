import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lunarcomm.access import AccessInterval
from lunarcomm.hybrid import (
    FORCED_PATTERNS,
    HYBRID,
    Prefer,
    SwitchPolicy,
    data_volume_gb,
    end_to_end_ber,
    evaluate_chain,
    parse_pattern,
    sample_chain,
    select_link,
)
from lunarcomm.linkbudget import LinkMetricsSample, Technology
from lunarcomm.timebase import Epoch, TimeGrid


def metrics(ber):
    return LinkMetricsSample(0.0, 1000.0, 0.0, 0.0, 0.0, 0.0, ber, 0.0)


def test_select_link_examples():
    pol = SwitchPolicy(1e-6)
    assert select_link(metrics(1e-3), metrics(1e-11), pol) is Technology.FSO
    assert select_link(metrics(1e-9), metrics(1e-3), pol) is Technology.RF
    assert select_link(metrics(1.0), metrics(1e-6), pol) is Technology.FSO
    assert select_link(metrics(0.4), metrics(0.0), SwitchPolicy(1e-6, "RF-only")) is Technology.RF
    assert select_link(metrics(0.0), metrics(0.4), SwitchPolicy(1e-6, Prefer.FSO_ONLY)) is Technology.FSO


@pytest.mark.parametrize("t", [0.0, 0.5, -1.0])
def test_policy_threshold_validation(t):
    with pytest.raises(ValueError):
        SwitchPolicy(t)


def test_patterns():
    assert len(FORCED_PATTERNS) == 8 and "RF-OP-RF" in FORCED_PATTERNS
    assert parse_pattern("RF-OP-RF") == (Technology.RF, Technology.FSO, Technology.RF)
    assert parse_pattern(HYBRID) is None
    with pytest.raises(ValueError, match="valid patterns"):
        parse_pattern("RF-XX-RF")


def test_end_to_end_ber_example():
    assert end_to_end_ber([1e-5, 1e-11, 1e-8]) == pytest.approx(1.0010009899899903e-05, rel=1e-12)
    assert end_to_end_ber([0.0, 0.0, 0.0]) == 0.0


@given(st.lists(st.floats(0, 0.5), min_size=1, max_size=5))
def test_end_to_end_ber_bounds(bers):
    e = end_to_end_ber(bers)
    assert max(bers) - 1e-15 <= e <= sum(bers) + 1e-15
    assert e == pytest.approx(end_to_end_ber(list(reversed(bers))), rel=1e-12, abs=1e-300)


def test_data_volume_examples():
    assert data_volume_gb(41563, 1) == pytest.approx(5.195, abs=1e-3)
    assert data_volume_gb(41564, 300) == pytest.approx(1558.650, abs=1e-3)
    assert data_volume_gb(0, 1000) == 0.0
    with pytest.raises(ValueError):
        data_volume_gb(-1, 1)


@given(st.floats(0, 1e5), st.floats(0, 1e3), st.floats(0, 10))
def test_data_volume_linear(d, r, k):
    assert data_volume_gb(k * d, r) == pytest.approx(k * data_volume_gb(d, r), rel=1e-12, abs=1e-12)
    assert data_volume_gb(d, k * r) == pytest.approx(k * data_volume_gb(d, r), rel=1e-12, abs=1e-12)


def test_sample_chain_weights_sum_to_duration():
    grid = TimeGrid(Epoch.j2000(), 1000.0, 10.0)
    ivs = [AccessInterval(3.5, 47.2), AccessInterval(101.0, 104.0), AccessInterval(500.0, 500.0 + 1e-3)]
    t, w = sample_chain(ivs, grid)
    assert np.sum(w) == pytest.approx(sum(iv.duration for iv in ivs))
    assert t[:4].tolist() == [10.0, 20.0, 30.0, 40.0]
    assert t[4] == pytest.approx(102.5)  # no grid point inside
    assert sample_chain([], grid)[0].size == 0


# -- evaluate_chain on synthetic hops ----------------------------------------------


@pytest.fixture(scope="module")
def hops(scenario):
    return scenario.hops


@pytest.fixture(scope="module")
def grid():
    return TimeGrid(Epoch.j2000(), 100.0, 10.0)


def fixed_ranges(d_l2g):
    return lambda t: {"E2L": np.full(t.shape, 8000.0), "L2G": np.full(t.shape, d_l2g), "G2M": np.full(t.shape, 8700.0)}


def test_forced_rf_op_rf(hops, grid):
    rep = evaluate_chain(hops, [AccessInterval(0, 100)], grid, SwitchPolicy(), fixed_ranges(364465.0), "RF-OP-RF")
    assert rep.bottleneck_rate_mbps == 15.0
    assert rep.volumes_gb["L2G"] == pytest.approx(data_volume_gb(100, 300))
    assert rep.selections("L2G").tolist() == ["FSO"] * rep.t.size
    assert np.allclose(rep.e2e_delay, (8000 + 364465 + 8700) / 299792.458)


def test_hybrid_selection_is_threshold_predicate(hops, grid):
    policy = SwitchPolicy(1e-6)
    # sweep the trunk distance so the FSO BER crosses the threshold
    far = lambda t: {"E2L": np.full(t.shape, 8000.0), "L2G": 4e5 * 10 ** (t / 40.0), "G2M": np.full(t.shape, 8700.0)}  # noqa: E731
    rep = evaluate_chain(hops, [AccessInterval(0, 100)], grid, policy, far)
    fso_ber = np.asarray(rep.metrics["L2G"][Technology.FSO].ber)
    sel = rep.selected_fso["L2G"]
    assert sel.any() and (~sel).any()
    assert np.all(fso_ber[sel] <= 1e-6) and np.all(fso_ber[~sel] > 1e-6)
    assert np.all(rep.hop_ber["L2G"][~sel] == np.asarray(rep.metrics["L2G"][Technology.RF].ber)[~sel])


def test_chain_report_invariants(hops, grid):
    for pat in FORCED_PATTERNS + (HYBRID,):
        rep = evaluate_chain(hops, [AccessInterval(0, 55.5)], grid, SwitchPolicy(), fixed_ranges(364465.0), pat)
        rates = np.stack([rep.hop_rate[h] for h in ("E2L", "L2G", "G2M")])
        assert np.array_equal(rep.bottleneck, rates.min(axis=0))
        assert np.allclose(rep.e2e_ber, end_to_end_ber([rep.hop_ber[h] for h in ("E2L", "L2G", "G2M")]))
        assert np.allclose(rep.e2e_delay, sum(rep.hop_delay[h] for h in ("E2L", "L2G", "G2M")))
        assert rep.chain_access_s == pytest.approx(55.5)


def test_op_never_worse_than_rf(hops, grid):
    kw = dict(chain_intervals=[AccessInterval(0, 100)], grid=grid, policy=SwitchPolicy(), ranges=fixed_ranges(364465.0))
    rf = evaluate_chain(hops, pattern="RF-RF-RF", **kw)
    op = evaluate_chain(hops, pattern="OP-OP-OP", **kw)
    assert op.bottleneck_rate_mbps >= rf.bottleneck_rate_mbps
    assert (rf.bottleneck_rate_mbps, op.bottleneck_rate_mbps) == (1.0, 300.0)


def test_bottleneck_permutation_invariant(hops, grid):
    kw = dict(chain_intervals=[AccessInterval(0, 100)], grid=grid, policy=SwitchPolicy(), ranges=fixed_ranges(364465.0))
    for perm in itertools.permutations(hops):
        rep = evaluate_chain(list(perm), pattern="RF-OP-RF", **kw)
        assert rep.bottleneck_rate_mbps == 15.0


def test_relay_delay_added_per_relay(hops, grid):
    kw = dict(chain_intervals=[AccessInterval(0, 100)], grid=grid, policy=SwitchPolicy(), ranges=fixed_ranges(364465.0))
    a = evaluate_chain(hops, **kw)
    b = evaluate_chain(hops, relay_delay_s=0.25, **kw)
    assert np.allclose(b.e2e_delay - a.e2e_delay, 0.5)


def test_empty_chain_flagged(hops, grid):
    rep = evaluate_chain(hops, [], grid, SwitchPolicy(), fixed_ranges(364465.0))
    assert rep.empty
    assert rep.volumes_gb == {"E2L": 0.0, "L2G": 0.0, "G2M": 0.0}
    assert rep.bottleneck_rate_mbps == 0.0
    assert np.isnan(rep.mean_e2e_ber)


def test_chain_needs_all_hops(hops, grid):
    with pytest.raises(ValueError):
        evaluate_chain(hops[:2], [AccessInterval(0, 10)], grid, SwitchPolicy(), fixed_ranges(1e5))


@settings(max_examples=25, deadline=None)
@given(st.floats(1e-12, 0.4))
def test_hybrid_threshold_property(thr):
    from lunarcomm.scenario import bundled_scenario

    hops = bundled_scenario().hops
    grid = TimeGrid(Epoch.j2000(), 100.0, 10.0)
    ranges = lambda t: {"E2L": 8000.0 + 0 * t, "L2G": 3e5 * 10 ** (t / 30.0), "G2M": 8700.0 + 0 * t}  # noqa: E731
    rep = evaluate_chain(hops, [AccessInterval(0, 100)], grid, SwitchPolicy(thr), ranges)
    for h in ("E2L", "L2G", "G2M"):
        ber = np.asarray(rep.metrics[h][Technology.FSO].ber)
        assert np.array_equal(rep.selected_fso[h], ber <= thr)
