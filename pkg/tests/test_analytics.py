"""Aggregation math: bucketing, deviation scoring, latency resampling, and
the monitoring-visibility graph."""

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from ledgerwatch.analytics import (
    BORDER_ORDERER_ID,
    BORDER_PEER_ID,
    Granularity,
    align_down,
    bucket_transactions,
    build_network_graph,
    deviation_score,
    latency_series,
    link_stats,
)
from ledgerwatch.model import MetricSample, MetricSeries, gossip_sample
from ledgerwatch.simulator import ScenarioKind, default_network
from ledgerwatch.store import InvalidRangeError, Store

from test_model import make_tx

MIN = 60_000
HOUR = 3_600_000
T0 = 1_600_000_000_000  # far from bucket boundaries of interest


class TestGranularity:
    def test_exactly_four_values(self):
        assert {g.token for g in Granularity} == {"1m", "1h", "12h", "24h"}
        assert [g.width_ms for g in Granularity] == [
            60_000, 3_600_000, 43_200_000, 86_400_000]

    def test_token_roundtrip(self):
        for g in Granularity:
            assert Granularity.from_token(g.token) is g
        with pytest.raises(ValueError):
            Granularity.from_token("2h")

    def test_alignment_epoch_stable(self):
        ts = T0 + 12_345_678
        down = align_down(ts, Granularity.HOUR_1)
        assert down % HOUR == 0 and down <= ts < down + HOUR


class TestBucketing:
    def test_no_transactions_all_zero_buckets(self):
        base = align_down(T0, Granularity.MIN_1)
        buckets = bucket_transactions([], Granularity.MIN_1, base, base + 5 * MIN)
        assert len(buckets) == 5
        assert all(b.total == 0 and not b.counts_by_msp for b in buckets)

    def test_unaligned_range_covers_intersecting_buckets(self):
        buckets = bucket_transactions([], Granularity.MIN_1, T0, T0 + 5 * MIN)
        assert len(buckets) == 6  # T0 is not minute-aligned
        assert buckets[0].bucket_start == align_down(T0, Granularity.MIN_1)

    def test_ten_tx_within_one_minute(self):
        base = align_down(T0, Granularity.MIN_1)
        txs = [make_tx(0, i, base + 10 * MIN + i) for i in range(10)]
        buckets = bucket_transactions(txs, Granularity.MIN_1, base, base + 30 * MIN)
        assert [b.total for b in buckets].count(0) == 29
        assert buckets[10].total == 10
        assert buckets[10].counts_by_msp == {"Org1": 10}

    def test_from_is_aligned_down(self):
        base = align_down(T0, Granularity.HOUR_1)
        tx = make_tx(0, 0, base + 10)  # before the unaligned from, inside the bucket
        buckets = bucket_transactions([tx], Granularity.HOUR_1, base + 5, base + HOUR)
        assert buckets[0].bucket_start == base
        assert buckets[0].total == 1

    def test_avg_size_key_iff_counted(self):
        base = align_down(T0, Granularity.MIN_1)
        txs = [
            make_tx(0, 0, base + 1, creator_msp="Org1", size_bytes=100),
            make_tx(0, 1, base + 2, creator_msp="Org1", size_bytes=300),
            make_tx(0, 2, base + 3, creator_msp="Org2", size_bytes=512),
        ]
        bucket = bucket_transactions(txs, Granularity.MIN_1, base, base + MIN)[0]
        assert bucket.avg_size_by_msp == {"Org1": 200.0, "Org2": 512.0}
        assert set(bucket.avg_size_by_msp) == set(bucket.counts_by_msp)

    def test_invalid_range(self):
        with pytest.raises(InvalidRangeError):
            bucket_transactions([], Granularity.MIN_1, 10, 5)

    @settings(max_examples=60, deadline=None)
    @given(
        offsets=st.lists(st.integers(0, 3 * HOUR - 1), max_size=200),
        g=st.sampled_from(list(Granularity)),
    )
    def test_conservation_and_stacking(self, offsets, g):
        txs = [
            make_tx(0, i, T0 + off, creator_msp=f"Org{off % 3 + 1}")
            for i, off in enumerate(offsets)
        ]
        buckets = bucket_transactions(txs, g, T0, T0 + 3 * HOUR)
        assert sum(b.total for b in buckets) == len(txs)
        for b in buckets:
            assert sum(b.counts_by_msp.values()) == b.total
        starts = [b.bucket_start for b in buckets]
        assert starts == sorted(starts)
        assert all(starts[i + 1] - starts[i] == g.width_ms for i in range(len(starts) - 1))


class TestDeviationScore:
    @pytest.mark.parametrize(
        "current,baseline,expected",
        [(100, 100, 0.0), (300, 100, 0.5), (0, 100, -1.0), (100, 0, 1.0), (0, 0, 0.0)],
    )
    def test_fixed_points(self, current, baseline, expected):
        assert deviation_score(current, baseline) == pytest.approx(expected, abs=1e-12)

    @settings(max_examples=300, deadline=None)
    @given(
        current=st.floats(0, 1e9, allow_nan=False),
        baseline=st.floats(0, 1e9, allow_nan=False),
    )
    def test_bounded_antisymmetric_zero_iff_equal(self, current, baseline):
        d = deviation_score(current, baseline)
        assert -1.0 <= d <= 1.0
        assert d == -deviation_score(baseline, current)
        if current == baseline:
            assert d == 0.0
        elif abs(current - baseline) > 1e-6 * (current + baseline):
            assert (d > 0) == (current > baseline)

    def test_strictly_increasing_in_current(self):
        rng = random.Random(7)
        for _ in range(500):
            baseline = rng.uniform(0.1, 1000)
            lo, hi = sorted((rng.uniform(0, 1000), rng.uniform(0, 1000)))
            if lo == hi:
                continue
            assert deviation_score(lo, baseline) < deviation_score(hi, baseline)


def constant_link_store(hours, per_hour=60.0, final_hour=None):
    """One sample per hour on a single link; `final_hour` overrides the last."""
    store = Store(None)
    samples = []
    for k in range(hours):
        value = final_hour if (final_hour is not None and k == hours - 1) else per_hour
        samples.append(gossip_sample(T0 + k * HOUR, "a", "b", value))
    store.append(samples)
    return store, T0 + hours * HOUR


class TestLinkStats:
    def test_steady_eight_days_zero_deviation(self):
        store, now = constant_link_store(192)
        stats = link_stats(store, ("a", "b"), now)
        assert stats.current == 60.0
        assert stats.baseline == pytest.approx(60.0, abs=1e-12)
        assert stats.deviation == pytest.approx(0.0, abs=1e-12)

    def test_ten_x_final_hour(self):
        store, now = constant_link_store(192, final_hour=600.0)
        stats = link_stats(store, ("a", "b"), now)
        assert stats.current == 600.0
        assert stats.deviation == pytest.approx(540.0 / 660.0, abs=1e-9)

    def test_cold_start_thirty_minutes_of_data(self):
        store = Store(None)
        store.append([
            gossip_sample(T0, "a", "b", 10.0),
            gossip_sample(T0 + 15 * MIN, "a", "b", 12.0),
        ])
        stats = link_stats(store, ("a", "b"), T0 + 30 * MIN)
        assert stats.deviation == 0.0
        assert stats.baseline == stats.current

    def test_warm_exactly_at_minimum_history(self):
        store = Store(None)
        store.append(
            [gossip_sample(T0 + k * 15 * MIN, "a", "b", 15.0) for k in range(6)])
        now = T0 + 90 * MIN  # history before now-1h is exactly 30 min
        stats = link_stats(store, ("a", "b"), now)
        assert stats.baseline == pytest.approx(60.0)  # 30 min of 2/min-rate traffic
        assert stats.current == 60.0
        assert stats.deviation == pytest.approx(0.0)

    def test_directions_summed(self):
        store = Store(None)
        store.append([
            gossip_sample(T0 + k * HOUR, "a", "b", 20.0) for k in range(50)
        ] + [
            gossip_sample(T0 + k * HOUR + 1, "b", "a", 40.0) for k in range(50)
        ])
        stats = link_stats(store, ("b", "a"), T0 + 50 * HOUR)
        assert stats.current == 60.0
        assert stats.deviation == pytest.approx(0.0, abs=1e-12)

    def test_empty_store_cold(self):
        assert link_stats(Store(None), ("a", "b"), T0).deviation == 0.0


class TestLatencySeries:
    def test_constant_ordering_means(self):
        store = Store(None)
        base = align_down(T0, Granularity.MIN_1)
        store.append([
            MetricSample(base + k * 15_000, MetricSeries.ORDERING_LATENCY, (), 0.8)
            for k in range(40)
        ])
        buckets = latency_series(store, base, base + 10 * MIN, Granularity.MIN_1)
        assert all(b.ordering_latency == pytest.approx(0.8) for b in buckets)

    def test_empty_bucket_is_null_not_zero(self):
        store = Store(None)
        base = align_down(T0, Granularity.MIN_1)
        store.append([MetricSample(base + 30, MetricSeries.ORDERING_LATENCY, (), 0.8)])
        buckets = latency_series(store, base, base + 3 * MIN, Granularity.MIN_1)
        assert buckets[0].ordering_latency == pytest.approx(0.8)
        assert buckets[1].ordering_latency is None
        assert buckets[1].total_seconds() is None

    def test_flood_window_means_exceed_pre_window(self, loaded_store):
        from ledgerwatch.simulator import ScenarioSpec, simulate

        trace = simulate(
            default_network(2, 2, seed=21),
            [ScenarioSpec(ScenarioKind.N2_TX_FLOOD, 20 * MIN, 10 * MIN, 50.0)],
            40 * MIN, 1.0)
        store = loaded_store(trace)
        buckets = latency_series(
            store, trace.start_ms, trace.end_ms, Granularity.MIN_1)
        w = trace.windows[0]
        pre = [b.total_seconds() for b in buckets
               if b.bucket_start + MIN <= w.start_ms and b.total_seconds() is not None]
        mid = [b.total_seconds() for b in buckets
               if w.start_ms <= b.bucket_start and b.bucket_start + MIN <= w.end_ms]
        assert min(mid) > max(pre)


class TestNetworkGraph:
    def test_node_census_two_msp_network(self):
        net = default_network(2, 2, seed=1)
        graph = build_network_graph(Store(None), net, T0)
        local = [n for n in graph.nodes if n.local]
        foreign = [n for n in graph.nodes if not n.local and not n.border]
        borders = [n for n in graph.nodes if n.border]
        assert len(local) == 3       # 2 peers + 1 orderer
        assert len(foreign) == 3
        assert len(borders) == 2
        assert {b.id for b in borders} == {BORDER_PEER_ID, BORDER_ORDERER_ID}

    def test_foreign_nodes_link_to_matching_border(self):
        net = default_network(3, 2, seed=1)
        graph = build_network_graph(Store(None), net, T0)
        by_id = {n.id: n for n in graph.nodes}
        foreign_links = [l for l in graph.links if l.target in (BORDER_PEER_ID, BORDER_ORDERER_ID)]
        assert len(foreign_links) == len([n for n in graph.nodes if not n.local and not n.border])
        for link in foreign_links:
            node = by_id[link.source]
            expected = BORDER_PEER_ID if node.kind.value == "PEER" else BORDER_ORDERER_ID
            assert link.target == expected
            assert link.current is None and link.baseline is None
            assert link.deviation == 0.0

    def test_dos_peak_deviation(self, dos_trace, loaded_store):
        store = loaded_store(dos_trace)
        window = dos_trace.windows[0]
        peak = window.start_ms + HOUR  # current hour fully inside the attack
        graph = build_network_graph(store, dos_trace.net, peak)
        target = {"Org1-peer0", "Org1-peer1"}
        local_links = [l for l in graph.links if l.current is not None]
        assert len(local_links) == 3
        for link in local_links:
            if {link.source, link.target} == target:
                assert abs(link.deviation) >= 0.8
            else:
                assert abs(link.deviation) < 0.3


class TestAggregationOracle:
    def test_small_random_traces_match_brute_force(self, tmp_path):
        from ledgerwatch import ingest
        from ledgerwatch.simulator import ScenarioSpec, simulate, write_trace

        rng = random.Random(4242)
        for case in range(5):
            net = default_network(rng.choice([2, 3]), rng.choice([1, 2]), seed=rng.randrange(1 << 16))
            scenarios = []
            if rng.random() < 0.5:
                scenarios.append(ScenarioSpec(ScenarioKind.N2_TX_FLOOD, 5 * MIN, 3 * MIN, 15.0))
            trace = simulate(net, scenarios, 12 * MIN, rng.uniform(0.3, 1.5))
            d = tmp_path / f"case{case}"
            write_trace(trace, d)
            store = Store(None)
            ingest.load_trace_directory(store, d)

            raw_txs = oracles.trace_transactions(d)
            raw_metrics = oracles.read_jsonl(d / "metrics.jsonl")
            lo, hi = trace.start_ms, trace.end_ms

            got = bucket_transactions(
                store.query_transactions(lo, hi), Granularity.MIN_1, lo, hi)
            want = oracles.bucket_transactions(raw_txs, MIN, lo, hi)
            assert len(got) == len(want)
            for g_bucket, w_bucket in zip(got, want):
                assert g_bucket.bucket_start == w_bucket["bucket_start"]
                assert g_bucket.total == w_bucket["total"]
                assert g_bucket.counts_by_msp == w_bucket["counts"]
                assert set(g_bucket.avg_size_by_msp) == set(w_bucket["avg"])
                for msp, avg in w_bucket["avg"].items():
                    assert g_bucket.avg_size_by_msp[msp] == pytest.approx(avg, rel=1e-9)

            got_lat = latency_series(store, lo, hi, Granularity.MIN_1)
            want_lat = oracles.latency_means(raw_metrics, MIN, lo, hi)
            for g_bucket, w_bucket in zip(got_lat, want_lat):
                for series, attr in [
                    ("ENDORSEMENT_DURATION", "endorsement_duration"),
                    ("ORDERING_LATENCY", "ordering_latency"),
                    ("VALIDATION_DURATION", "validation_duration"),
                ]:
                    expected = w_bucket[series]
                    actual = getattr(g_bucket, attr)
                    if expected is None:
                        assert actual is None
                    else:
                        assert actual == pytest.approx(expected, rel=1e-9)

            for link in store.gossip_links():
                a, b = link
                now = trace.end_ms
                stats = link_stats(store, link, now)
                assert stats.current == pytest.approx(
                    oracles.link_sum(raw_metrics, a, b, now - HOUR, now), rel=1e-9)
