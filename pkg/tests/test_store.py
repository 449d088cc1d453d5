"""Store contracts: append validation, natural-key dedup, query semantics,
replay equivalence, and the brute-force query oracle."""

import random

import pytest

from ledgerwatch import ingest
from ledgerwatch.model import (
    LogLevel,
    MetricSeries,
    TxType,
    ViolationKind,
)
from ledgerwatch.simulator import (
    ScenarioKind,
    ScenarioSpec,
    default_network,
    simulate,
    write_trace,
)
from ledgerwatch.store import (
    DuplicateEventError,
    InvalidRangeError,
    Store,
    ValidationFailedError,
)

import oracles
from test_model import make_chain

MIN = 60_000


class TestAppend:
    def test_seq_advances_per_event(self):
        store = Store(None)
        blocks = make_chain(3)
        assert store.append(blocks) == 3
        assert store.height() == 2

    def test_reappend_block_is_duplicate(self):
        store = Store(None)
        blocks = make_chain(3)
        store.append(blocks)
        with pytest.raises(DuplicateEventError):
            store.append([blocks[2]])

    def test_gap_rejected_with_violation(self):
        store = Store(None)
        blocks = make_chain(4)
        store.append(blocks[:2])
        with pytest.raises(ValidationFailedError) as err:
            store.append([blocks[3]])
        assert [v.kind for v in err.value.violations] == [ViolationKind.GAP]

    def test_first_block_must_be_zero(self):
        store = Store(None)
        with pytest.raises(ValidationFailedError):
            store.append(make_chain(2)[1:])

    def test_hash_chain_checked_across_appends(self):
        from dataclasses import replace

        store = Store(None)
        blocks = make_chain(3)
        store.append(blocks[:1])
        bad = replace(blocks[1], prev_hash="aa" * 32)
        with pytest.raises(ValidationFailedError) as err:
            store.append([bad])
        assert [v.kind for v in err.value.violations] == [ViolationKind.HASH_CHAIN]

    def test_tail_path_skips_duplicates_silently(self):
        store = Store(None)
        blocks = make_chain(2)
        store.append(blocks)
        seq = store.append(blocks, already_persisted=True)
        assert seq == 2  # nothing new indexed

    def test_duplicate_metric_key_rejected(self, baseline_trace):
        store = Store(None)
        sample = baseline_trace.metrics[0]
        store.append([sample])
        with pytest.raises(DuplicateEventError):
            store.append([sample])

    def test_read_your_writes(self):
        store = Store(None)
        blocks = make_chain(2)
        store.append(blocks)
        txs = store.query_transactions(0, 1 << 62)
        assert len(txs) == sum(b.tx_count for b in blocks)


class TestQueries:
    @pytest.fixture()
    def store(self, loaded_store, sc2_trace):
        return loaded_store(sc2_trace)

    def test_full_range_returns_everything(self, store, sc2_trace):
        txs = store.query_transactions(0, 1 << 62)
        assert len(txs) == len(sc2_trace.transactions())

    def test_ordering_by_block_and_index(self, store):
        txs = store.query_transactions(0, 1 << 62)
        keys = [(t.block_num, t.tx_index) for t in txs]
        assert keys == sorted(keys)

    def test_chaincode_filter_exact_count(self, store, sc2_trace):
        expected = sum(1 for t in sc2_trace.transactions() if t.chaincode == "vulncc")
        assert expected == 20  # the exploit burst
        assert len(store.query_transactions(0, 1 << 62, chaincode="vulncc")) == expected

    def test_empty_half_open_interval(self, store):
        some_ts = store.query_transactions(0, 1 << 62)[10].timestamp
        assert store.query_transactions(some_ts, some_ts) == []

    def test_half_open_boundaries(self, store):
        tx = store.query_transactions(0, 1 << 62)[10]
        ts = tx.timestamp
        within = store.query_transactions(ts, ts + 1)
        assert tx in within
        assert tx not in store.query_transactions(0, ts)

    def test_invalid_range(self, store):
        with pytest.raises(InvalidRangeError):
            store.query_transactions(10, 5)
        with pytest.raises(InvalidRangeError):
            store.query_metrics(MetricSeries.GOSSIP_SENT, 10, 5)

    def test_tx_type_filter(self, loaded_store, ac1_trace):
        store = loaded_store(ac1_trace)
        config = store.query_transactions(0, 1 << 62, tx_type=TxType.CONFIG)
        assert len(config) == 1

    def test_metrics_match_raw_file(self, sc2_trace, trace_dir):
        d = trace_dir(sc2_trace)
        store = Store(None)
        ingest.load_trace_directory(store, d)
        raw = oracles.read_jsonl(d / "metrics.jsonl")
        expected = sum(1 for s in raw if s["series"] == "ENDORSEMENT_DURATION")
        got = store.query_metrics(MetricSeries.ENDORSEMENT_DURATION, 0, 1 << 62)
        assert len(got) == expected

    def test_gossip_link_samples_match_raw(self, dos_trace, trace_dir):
        d = trace_dir(dos_trace)
        store = Store(None)
        ingest.load_trace_directory(store, d)
        raw = oracles.read_jsonl(d / "metrics.jsonl")
        a, b = "Org1-peer0", "Org1-peer1"
        lo, hi = dos_trace.start_ms, dos_trace.end_ms + 1
        expected = oracles.link_sum(raw, a, b, lo, hi)
        assert store.link_traffic(a, b, lo, hi) == pytest.approx(expected)
        samples = store.query_metrics(
            MetricSeries.GOSSIP_SENT, lo, hi, labels={"source": a, "target": b})
        raw_dir = [s for s in raw if s["series"] == "GOSSIP_SENT"
                   and s["labels"] == {"source": a, "target": b}]
        assert len(samples) == len(raw_dir)

    def test_unknown_label_value_empty(self, store):
        assert store.query_metrics(
            MetricSeries.GOSSIP_SENT, 0, 1 << 62, labels={"source": "nope"}) == []

    @pytest.fixture()
    def log_store(self):
        from ledgerwatch.model import LogLine

        store = Store(None)
        levels = [LogLevel.DEBUG, LogLevel.INFO, LogLevel.WARN, LogLevel.ERROR]
        store.append([
            LogLine(1000 + i, f"peer{i % 3}", levels[i % 4], f"line {i}")
            for i in range(40)
        ])
        return store

    def test_logs_level_filter(self, log_store):
        lines = log_store.query_logs(level_min=LogLevel.ERROR, limit=10_000)
        assert len(lines) == 10
        assert all(l.level is LogLevel.ERROR for l in lines)
        warn_up = log_store.query_logs(level_min=LogLevel.WARN, limit=10_000)
        assert len(warn_up) == 20

    def test_logs_limit_and_order(self, log_store):
        lines = log_store.query_logs(limit=5)
        assert len(lines) == 5
        assert [l.timestamp for l in lines] == [1039, 1038, 1037, 1036, 1035]

    def test_logs_node_filter(self, log_store):
        lines = log_store.query_logs(node="peer0", limit=10_000)
        assert lines and all(l.node == "peer0" for l in lines)

    def test_logs_limit_cap(self, store):
        with pytest.raises(InvalidRangeError):
            store.query_logs(limit=10_001)


class TestReplayEquivalence:
    def _answers(self, store: Store, probes):
        return [
            [t.tx_id for t in store.query_transactions(lo, hi)] for lo, hi in probes
        ] + [
            store.alert_counts_by_severity(),
            store.height(),
            [l.message for l in store.query_logs(limit=50)],
            store.gossip_links(),
        ]

    def test_restart_midway_equals_fresh(self, tmp_path, baseline_trace, trace_dir):
        src = trace_dir(baseline_trace)
        lo, hi = baseline_trace.start_ms, baseline_trace.end_ms
        probes = [(lo, hi), (lo + 5 * MIN, lo + 20 * MIN)]

        fresh = Store(None)
        ingest.load_trace_directory(fresh, src)

        # Same content streamed through a persistent store in two sessions.
        half_dir = tmp_path / "restart"
        first = Store(half_dir)
        blocks = baseline_trace.blocks
        cut = len(blocks) // 2
        first.append(blocks[:cut])
        first.append(baseline_trace.metrics[: len(baseline_trace.metrics) // 2])
        first.close()

        second = Store(half_dir)
        pipeline = ingest.IngestPipeline(second, ingest.directory_sources(half_dir))
        pipeline.poll_all()  # rebuild indexes from the persisted prefix
        second.append(blocks[cut:])
        second.append(baseline_trace.metrics[len(baseline_trace.metrics) // 2:])
        second.append(baseline_trace.logs)
        second.append(baseline_trace.chaincodes)
        second.append(baseline_trace.issues)

        assert self._answers(second, probes) == self._answers(fresh, probes)

    def test_alerts_since_newest_first(self):
        from ledgerwatch.detect import parse_error_alert

        store = Store(None)
        store.append([parse_error_alert("logs", i, f"junk {i}", 1000 + i * 10)
                      for i in range(5)])
        alerts = store.alerts_since(1010)
        assert [a.raised_at for a in alerts] == [1040, 1030, 1020, 1010]

    def test_own_streams_reload(self, tmp_path):
        from ledgerwatch.detect import scan_chaincode
        from ledgerwatch.simulator import vulnerable_chaincode

        store = Store(tmp_path / "own")
        report = scan_chaincode(vulnerable_chaincode(), report_id="r-1", scanned_at=5)
        store.append([report])
        store.close()

        reopened = Store(tmp_path / "own")
        assert reopened.latest_scan_report("vulncc") == report


class TestQueryOracle:
    def test_random_probes_match_brute_force(self, sc2_trace, trace_dir):
        d = trace_dir(sc2_trace)
        store = Store(None)
        ingest.load_trace_directory(store, d)
        raw_txs = oracles.trace_transactions(d)
        raw_metrics = oracles.read_jsonl(d / "metrics.jsonl")
        raw_logs = oracles.read_jsonl(d / "logs.jsonl")

        rng = random.Random(1234)
        lo, hi = sc2_trace.start_ms, sc2_trace.end_ms
        for _ in range(25):
            a = rng.randrange(lo - MIN, hi + MIN)
            b = a + rng.randrange(0, hi - lo)
            chaincode = rng.choice([None, "assetcc", "vulncc", "nope"])
            msp = rng.choice([None, "Org1", "Org2"])
            got = store.query_transactions(a, b, chaincode=chaincode, msp=msp)
            want = oracles.query_transactions(raw_txs, a, b, chaincode=chaincode, msp=msp)
            assert [t.tx_id for t in got] == [t["tx_id"] for t in want]

            series = rng.choice(list(MetricSeries))
            got_m = store.query_metrics(series, a, b)
            want_m = oracles.query_metrics(raw_metrics, series.value, a, b)
            assert [(m.timestamp, m.value) for m in got_m] == [
                (m["timestamp"], m["value"]) for m in want_m]

            level = rng.choice(list(LogLevel))
            limit = rng.choice([1, 5, 100])
            got_l = store.query_logs(level_min=level, from_ms=a, to_ms=b, limit=limit)
            want_l = oracles.query_logs(raw_logs, None, level.value, a, b, limit)
            assert [l.message for l in got_l] == [l["message"] for l in want_l]
