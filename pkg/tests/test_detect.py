"""Rule engine and scanner: threshold semantics, maximal-run alerting,
scanner-vs-brute-force equivalence, and exactly-once evaluation."""

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from ledgerwatch.analytics import LatencyBucket, TxBucket
from ledgerwatch.detect import (
    RuleConfig,
    evaluate_all,
    rule_config_change,
    rule_latency,
    rule_link_deviation,
    rule_scan_findings,
    rule_tx_flood,
    rule_tx_size,
    scan_chaincode,
)
from ledgerwatch.model import (
    CcFunction,
    CcOp,
    CcOpKind,
    ChaincodeIR,
    FindingSeverity,
    ScanRule,
    Severity,
    ThreatCode,
    TxType,
)
from ledgerwatch.simulator import (
    ScenarioKind,
    ScenarioSpec,
    default_network,
    simulate,
)

from test_model import make_tx

MIN = 60_000
T0 = 1_614_556_800_000  # minute-aligned


def ir(*ops: tuple[CcOpKind, str], name="cc", fn="f") -> ChaincodeIR:
    return ChaincodeIR(name, (CcFunction(fn, tuple(CcOp(k, a) for k, a in ops)),))


R, W = CcOpKind.READ, CcOpKind.WRITE


class TestRuleConfig:
    def test_defaults(self):
        cfg = RuleConfig()
        assert cfg.link_dev_threshold == 0.8
        assert cfg.flood_multiplier == 10.0
        assert cfg.size_min_bytes == 102_400

    def test_from_file(self, tmp_path):
        path = tmp_path / "rules.conf"
        path.write_text(
            "# tighter flood rule\nflood_multiplier = 5\nlatency_threshold_s = 2.5\n",
            encoding="utf-8")
        cfg = RuleConfig.from_file(path)
        assert cfg.flood_multiplier == 5.0
        assert cfg.latency_threshold_s == 2.5
        assert cfg.link_dev_threshold == 0.8  # untouched default

    def test_unknown_key_rejected(self, tmp_path):
        path = tmp_path / "rules.conf"
        path.write_text("not_a_setting = 1\n", encoding="utf-8")
        with pytest.raises(ValueError, match="unknown rule setting"):
            RuleConfig.from_file(path)

    @pytest.mark.parametrize("kw", [
        {"link_dev_threshold": 0.0},
        {"link_dev_threshold": 1.5},
        {"link_dev_sustain": 0},
        {"flood_multiplier": 0.5},
        {"latency_threshold_s": 0},
    ])
    def test_out_of_range_rejected(self, kw):
        with pytest.raises(ValueError):
            RuleConfig(**kw)


class TestScanner:
    def test_read_before_write_is_clean(self):
        assert scan_chaincode(ir((R, "a"), (W, "a"))).findings == ()

    def test_write_then_read_flags_once_per_key(self):
        report = scan_chaincode(ir((W, "a"), (R, "a"), (R, "a")))
        assert len(report.findings) == 1
        f = report.findings[0]
        assert f.rule is ScanRule.READ_AFTER_WRITE
        assert f.key_or_source == "a"
        assert f.severity is FindingSeverity.HIGH

    def test_nondeterminism_per_occurrence(self):
        report = scan_chaincode(ir(
            (CcOpKind.RANDOM, ""), (R, "a"), (CcOpKind.TIMESTAMP, ""), (CcOpKind.RANDOM, "")))
        nondet = [f for f in report.findings if f.rule is ScanRule.NONDETERMINISM]
        assert len(nondet) == 3
        assert all(f.severity is FindingSeverity.MEDIUM for f in nondet)
        assert {f.key_or_source for f in nondet} == {"RANDOM", "TIMESTAMP"}

    def test_findings_ordered(self):
        cc = ChaincodeIR("cc", (
            CcFunction("zeta", (CcOp(W, "k"), CcOp(R, "k"))),
            CcFunction("alpha", (CcOp(CcOpKind.RANDOM, ""), CcOp(W, "b"), CcOp(R, "b"))),
        ))
        report = scan_chaincode(cc)
        keys = [(f.function, f.rule.value, f.key_or_source) for f in report.findings]
        assert keys == sorted(keys)

    def test_range_read_and_other_ignored(self):
        report = scan_chaincode(ir((W, "a"), (CcOpKind.RANGE_READ, "a"), (CcOpKind.OTHER, "")))
        assert report.findings == ()

    @settings(max_examples=200, deadline=None)
    @given(st.lists(
        st.tuples(st.sampled_from([R, W]), st.sampled_from(["a", "b", "c"])),
        max_size=12))
    def test_matches_pairwise_oracle(self, ops):
        report = scan_chaincode(ir(*ops))
        got = {f.key_or_source for f in report.findings
               if f.rule is ScanRule.READ_AFTER_WRITE}
        want = oracles.read_after_write_keys([(k.value, a) for k, a in ops])
        assert got == want


class TestConfigRule:
    def test_endorser_ignored(self):
        assert rule_config_change(make_tx()) is None

    def test_config_raises_high_alert(self):
        tx = make_tx(tx_type=TxType.CONFIG, chaincode="", ts=12345)
        alert = rule_config_change(tx)
        assert alert.severity is Severity.HIGH
        assert alert.threat_codes == (ThreatCode.AC1, ThreatCode.C1)
        assert alert.evidence[0].ref == tx.tx_id
        assert alert.raised_at == 12345

    def test_same_tx_same_alert_id(self):
        tx = make_tx(tx_type=TxType.CONFIG, chaincode="")
        assert rule_config_change(tx).alert_id == rule_config_change(tx).alert_id


def dev_series(devs):
    return [(T0 + i * MIN, d) for i, d in enumerate(devs)]


class TestLinkRule:
    def test_zero_deviation_quiet(self):
        assert rule_link_deviation(("a", "b"), dev_series([0.0] * 60), RuleConfig()) == []

    def test_one_maximal_run(self):
        alerts = rule_link_deviation(
            ("a", "b"), dev_series([0.9, 0.9, 0.9, 0.1]), RuleConfig())
        assert len(alerts) == 1
        assert alerts[0].raised_at == T0  # onset evaluation
        assert alerts[0].threat_codes == (ThreatCode.N1, ThreatCode.N2, ThreatCode.N3)

    def test_sustain_requirement(self):
        cfg = RuleConfig()
        assert rule_link_deviation(("a", "b"), dev_series([0.9, 0.1, 0.9, 0.1]), cfg) == []
        assert len(rule_link_deviation(("a", "b"), dev_series([0.9, 0.9]), cfg)) == 1

    def test_negative_deviation_counts(self):
        alerts = rule_link_deviation(("a", "b"), dev_series([-0.95, -0.9]), RuleConfig())
        assert len(alerts) == 1

    def test_two_runs_two_alerts(self):
        devs = [0.9, 0.9, 0.0, 0.0, 0.85, 0.95]
        alerts = rule_link_deviation(("a", "b"), dev_series(devs), RuleConfig())
        assert len(alerts) == 2


def buckets_from_totals(totals, msp="Org1", size=3072.0):
    out = []
    for i, total in enumerate(totals):
        bucket = TxBucket(T0 + i * MIN, total=total)
        if total:
            bucket.counts_by_msp = {msp: total}
            bucket.avg_size_by_msp = {msp: size}
        out.append(bucket)
    return out


class TestFloodRule:
    def test_uniform_traffic_quiet(self):
        assert rule_tx_flood(buckets_from_totals([10] * 120), RuleConfig()) == []

    def test_burst_yields_exactly_one_alert(self):
        totals = [10] * 60 + [600] * 5 + [10] * 30
        alerts = rule_tx_flood(buckets_from_totals(totals), RuleConfig())
        assert len(alerts) == 1
        alert = alerts[0]
        assert alert.threat_codes == (ThreatCode.N2, ThreatCode.C2)
        assert alert.evidence[0].window == (T0 + 60 * MIN, T0 + 61 * MIN)
        assert "600" in alert.summary

    def test_cold_baseline_floor_guard(self):
        # 40 tx/min from a standing start: below the absolute floor, no alert.
        assert rule_tx_flood(buckets_from_totals([40] * 30), RuleConfig()) == []

    def test_first_bucket_never_evaluated(self):
        assert rule_tx_flood(buckets_from_totals([500] + [500] * 5), RuleConfig()) == []

    def test_burst_above_floor_with_cold_history_fires(self):
        totals = [10] * 10 + [600] * 3 + [10] * 5
        alerts = rule_tx_flood(buckets_from_totals(totals), RuleConfig())
        assert len(alerts) == 1

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.integers(0, 2000), min_size=2, max_size=80))
    def test_one_alert_per_maximal_above_threshold_run(self, totals):
        """Independently recompute the dynamic thresholds, then check the rule
        emits exactly one alert per maximal above-threshold run (never one
        per bucket)."""
        import statistics

        cfg = RuleConfig()
        flags = []
        for i, total in enumerate(totals):
            trailing = totals[max(0, i - cfg.flood_baseline_window):i]
            if not trailing:
                flags.append(False)
                continue
            threshold = max(cfg.flood_min_count,
                            cfg.flood_multiplier * statistics.median(trailing))
            flags.append(total > threshold)
        runs = sum(
            1 for i, f in enumerate(flags) if f and (i == 0 or not flags[i - 1]))
        alerts = rule_tx_flood(buckets_from_totals(totals), cfg)
        assert len(alerts) == runs


class TestSizeRule:
    def test_constant_sizes_quiet(self):
        assert rule_tx_size(buckets_from_totals([10] * 120), RuleConfig()) == []

    def test_msp_jump_named_in_alert(self):
        buckets = buckets_from_totals([10] * 90)
        for i in range(60, 63):
            buckets[i].avg_size_by_msp = {"Org1": 3072.0, "Org2": 512_000.0}
            buckets[i].counts_by_msp = {"Org1": 8, "Org2": 2}
        for i in range(50, 60):  # give Org2 a trailing history
            buckets[i].avg_size_by_msp["Org2"] = 3000.0
            buckets[i].counts_by_msp["Org2"] = 2
        alerts = rule_tx_size(buckets, RuleConfig())
        assert len(alerts) == 1
        assert "Org2" in alerts[0].summary
        assert alerts[0].evidence[0].ref == "avg_tx_size:Org2"
        assert alerts[0].threat_codes == (ThreatCode.N2,)

    def test_fifty_kib_spike_below_floor(self):
        # max(100 KiB, 10 x 3 KiB median) = 100 KiB, so 50 KiB stays quiet.
        buckets = buckets_from_totals([10] * 90)
        for i in range(60, 63):
            buckets[i].avg_size_by_msp = {"Org1": 51_200.0}
        assert rule_tx_size(buckets, RuleConfig()) == []


def latency_buckets(sums):
    out = []
    for i, s in enumerate(sums):
        if s is None:
            out.append(LatencyBucket(T0 + i * MIN))
        else:
            out.append(LatencyBucket(T0 + i * MIN, s * 0.1, s * 0.7, s * 0.2))
    return out


class TestLatencyRule:
    def test_baseline_quiet(self):
        assert rule_latency(latency_buckets([1.0] * 60), RuleConfig()) == []

    def test_flood_window_fires_once(self):
        alerts = rule_latency(latency_buckets([1.0] * 30 + [8.0] * 5 + [1.0] * 5),
                              RuleConfig())
        assert len(alerts) == 1
        assert alerts[0].threat_codes == (ThreatCode.N2,)

    def test_null_buckets_skipped(self):
        assert rule_latency(latency_buckets([None, 8.0, None]), RuleConfig()) != []
        assert rule_latency(latency_buckets([None] * 10), RuleConfig()) == []

    def test_null_breaks_runs(self):
        alerts = rule_latency(latency_buckets([8.0, 8.0, None, 8.0]), RuleConfig())
        assert len(alerts) == 2


class TestScanFindingsRule:
    def test_clean_report_no_alert(self):
        report = scan_chaincode(ir((R, "a"), (W, "a")))
        assert rule_scan_findings(report) is None

    def test_high_finding_high_alert(self):
        report = scan_chaincode(ir((W, "a"), (R, "a")))
        alert = rule_scan_findings(report)
        assert alert.severity is Severity.HIGH
        assert set(alert.threat_codes) == {ThreatCode.SC1, ThreatCode.SC2, ThreatCode.SC3}
        assert alert.evidence[0].ref == report.report_id

    def test_medium_only_warns(self):
        report = scan_chaincode(ir((CcOpKind.RANDOM, "")))
        assert rule_scan_findings(report).severity is Severity.WARNING


COMPOSITE_SCENARIOS = [
    ScenarioSpec(ScenarioKind.SC2_VULN_CHAINCODE, 10 * MIN, 10 * MIN),
    ScenarioSpec(ScenarioKind.N2_TX_FLOOD, 60 * MIN, 10 * MIN, 50.0),
    ScenarioSpec(ScenarioKind.AC1_CONFIG_CHANGE, 60 * MIN, 0),
]


@pytest.fixture(scope="module")
def composite_trace():
    return simulate(default_network(2, 2, seed=101), COMPOSITE_SCENARIOS,
                    length_ms=120 * MIN, baseline_tps=2.0)


class TestEvaluateAll:
    def test_composite_covers_all_three_attacks(self, loaded_store, composite_trace):
        store = loaded_store(composite_trace)
        now = store.latest_event_ts() + 2 * MIN
        alerts = evaluate_all(store, RuleConfig(), now)
        rules = {a.rule for a in alerts}
        assert {"scan_findings", "tx_flood", "config_change"} <= rules
        scan = next(a for a in alerts if a.rule == "scan_findings")
        assert scan.severity is Severity.HIGH

    def test_second_evaluation_returns_nothing(self, loaded_store, composite_trace):
        store = loaded_store(composite_trace)
        now = store.latest_event_ts() + 2 * MIN
        assert evaluate_all(store, RuleConfig(), now)
        assert evaluate_all(store, RuleConfig(), now) == []

    def test_incremental_equals_one_shot(self, loaded_store):
        """Evaluating minute by minute as a live service would must accumulate
        exactly the alerts a single full-trace pass produces."""
        trace = simulate(
            default_network(2, 2, seed=303),
            [
                ScenarioSpec(ScenarioKind.SC2_VULN_CHAINCODE, 5 * MIN, 5 * MIN),
                ScenarioSpec(ScenarioKind.N2_TX_FLOOD, 20 * MIN, 5 * MIN, 40.0),
                ScenarioSpec(ScenarioKind.AC1_CONFIG_CHANGE, 30 * MIN, 0),
            ],
            length_ms=40 * MIN,
            baseline_tps=1.0,
        )
        end = trace.end_ms + 2 * MIN

        incremental = loaded_store(trace)
        for now in range(trace.start_ms + MIN, end + MIN, MIN):
            evaluate_all(incremental, RuleConfig(), now)

        one_shot = loaded_store(trace)
        evaluate_all(one_shot, RuleConfig(), end)

        def key(alert):
            return (alert.alert_id, alert.rule, alert.severity, alert.threat_codes,
                    alert.evidence, alert.raised_at, alert.summary)

        assert {key(a) for a in incremental.alerts()} == {key(a) for a in one_shot.alerts()}

    def test_baseline_store_quiet(self, loaded_store, baseline_trace):
        store = loaded_store(baseline_trace)
        now = store.latest_event_ts() + 2 * MIN
        assert evaluate_all(store, RuleConfig(), now) == []
