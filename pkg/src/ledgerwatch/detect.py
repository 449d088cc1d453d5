"""Detection rule engine and chaincode static checker.

Alert identity is data-derived: every alert's id is a hash of its rule plus
the natural key of the triggering condition (transaction id, link and onset
window, bucket window start, chaincode findings fingerprint). Re-evaluating
the same stored prefix therefore never raises duplicates, and offline replay
produces exactly the alert set a live service accumulates over the same data.

Analyst task coverage (threat-code branches in parentheses):
  vulnerable chaincode review   -> scan_chaincode + rule_scan_findings (SC)
  framework vulnerability feed  -> issue list, informational only
  log inspection                -> log query API, informational only
  network activity review       -> rule_link_deviation (N)
  transaction metrics over time -> rule_tx_flood, rule_tx_size, rule_latency (N, C)
  block/transaction history     -> transaction query API + alert evidence
  configuration change review   -> rule_config_change (C, AC)
  identity abuse                -> rule_config_change's access-control tagging (AC)
"""

from __future__ import annotations

import hashlib
import statistics
import threading
import time
import uuid
from dataclasses import dataclass, fields

from .analytics import (
    Granularity,
    LatencyBucket,
    TxBucket,
    align_down,
    bucket_transactions,
    latency_series,
    link_stats,
)
from .model import (
    Alert,
    CcOpKind,
    ChaincodeIR,
    Evidence,
    EvidenceKind,
    Finding,
    FindingSeverity,
    MspId,
    ScanReport,
    ScanRule,
    Severity,
    ThreatCode,
    Transaction,
    TxType,
)
from .store import Store

MINUTE_MS = 60_000
HOUR_MS = 3_600_000


@dataclass(frozen=True)
class RuleConfig:
    """Detection thresholds; defaults are calibrated so a clean baseline
    trace raises no alerts."""

    link_dev_threshold: float = 0.8   # |deviation| that counts as anomalous
    link_dev_sustain: int = 2         # consecutive per-minute evaluations
    flood_multiplier: float = 10.0    # x trailing median tx/min
    flood_min_count: int = 50         # absolute floor, guards cold baselines
    flood_baseline_window: int = 60   # trailing window, minutes
    size_multiplier: float = 10.0     # x trailing median mean size per MSP
    size_min_bytes: int = 102_400     # absolute floor
    latency_threshold_s: float = 5.0  # sum of the three latency means

    def __post_init__(self):
        if not 0 < self.link_dev_threshold <= 1:
            raise ValueError("link_dev_threshold must be in (0, 1]")
        if self.link_dev_sustain < 1:
            raise ValueError("link_dev_sustain must be positive")
        if self.flood_multiplier < 1 or self.size_multiplier < 1:
            raise ValueError("multipliers must be >= 1")
        if self.flood_min_count < 1 or self.size_min_bytes < 1:
            raise ValueError("floors must be positive")
        if self.flood_baseline_window < 1:
            raise ValueError("flood_baseline_window must be positive")
        if self.latency_threshold_s <= 0:
            raise ValueError("latency_threshold_s must be positive")

    @classmethod
    def from_file(cls, path) -> "RuleConfig":
        """Load overrides from a `key = value` file; unknown keys are rejected."""
        known = {f.name: f.type for f in fields(cls)}
        values = {}
        with open(path, "r", encoding="utf-8") as fh:
            for line_no, raw in enumerate(fh, 1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ValueError(f"{path}:{line_no}: expected 'key = value'")
                key, _, value = (part.strip() for part in line.partition("="))
                if key not in known:
                    raise ValueError(f"{path}:{line_no}: unknown rule setting {key!r}")
                values[key] = int(value) if known[key] == "int" else float(value)
        return cls(**values)


def _alert_id(dedup_key: str) -> str:
    return "al-" + hashlib.sha1(dedup_key.encode()).hexdigest()[:16]


def _alert(
    rule: str,
    dedup_key: str,
    raised_at: int,
    codes: tuple[ThreatCode, ...],
    severity: Severity,
    summary: str,
    evidence: tuple[Evidence, ...],
) -> Alert:
    return Alert(_alert_id(dedup_key), raised_at, rule, codes, severity, summary, evidence)


# -- chaincode scanner --------------------------------------------------------

_NONDET_OPS = (CcOpKind.RANDOM, CcOpKind.TIMESTAMP)


def scan_chaincode(
    cc: ChaincodeIR,
    *,
    report_id: str | None = None,
    scanned_at: int | None = None,
) -> ScanReport:
    """Static checks over a chaincode IR.

    Emits one HIGH read-after-write finding per (function, key) where a read
    of the key follows a write to it, and one MEDIUM nondeterminism finding
    per random/timestamp op occurrence. Findings are ordered by
    (function, rule, key_or_source).
    """
    findings: list[Finding] = []
    for fn in cc.functions:
        written: set[str] = set()
        raw_keys: set[str] = set()
        for op in fn.ops:
            if op.kind is CcOpKind.WRITE:
                written.add(op.arg)
            elif op.kind is CcOpKind.READ and op.arg in written:
                raw_keys.add(op.arg)
            elif op.kind in _NONDET_OPS:
                findings.append(Finding(
                    ScanRule.NONDETERMINISM, fn.name, op.kind.value, FindingSeverity.MEDIUM))
        findings.extend(
            Finding(ScanRule.READ_AFTER_WRITE, fn.name, key, FindingSeverity.HIGH)
            for key in raw_keys
        )
    findings.sort(key=lambda f: (f.function, f.rule.value, f.key_or_source))
    return ScanReport(
        report_id=report_id or f"scan-{uuid.uuid4().hex[:12]}",
        chaincode=cc.name,
        scanned_at=scanned_at if scanned_at is not None else int(time.time() * 1000),
        findings=tuple(findings),
    )


def findings_fingerprint(report: ScanReport) -> str:
    payload = "|".join(
        f"{f.function}:{f.rule.value}:{f.key_or_source}:{f.severity.value}"
        for f in report.findings
    )
    return hashlib.sha1(payload.encode()).hexdigest()[:16]


def rule_scan_findings(report: ScanReport) -> Alert | None:
    """HIGH findings raise a HIGH alert, MEDIUM-only a WARNING, clean none."""
    if not report.findings:
        return None
    order = list(FindingSeverity)
    top = max((f.severity for f in report.findings), key=order.index)
    severity = {
        FindingSeverity.HIGH: Severity.HIGH,
        FindingSeverity.MEDIUM: Severity.WARNING,
        FindingSeverity.LOW: Severity.INFO,
    }[top]
    return _alert(
        "scan_findings",
        f"scan_findings|{report.chaincode}|{findings_fingerprint(report)}",
        report.scanned_at,
        (ThreatCode.SC1, ThreatCode.SC2, ThreatCode.SC3),
        severity,
        f"Chaincode {report.chaincode}: {len(report.findings)} scanner finding(s), "
        f"max severity {top.value}",
        (Evidence(EvidenceKind.SCAN_REPORT, report.report_id),),
    )


# -- event and series rules ---------------------------------------------------

def rule_config_change(tx: Transaction) -> Alert | None:
    """Every configuration transaction is alert-worthy, immediately."""
    if tx.tx_type is not TxType.CONFIG:
        return None
    return _alert(
        "config_change",
        f"config_change|{tx.tx_id}",
        tx.timestamp,
        (ThreatCode.AC1, ThreatCode.C1),
        Severity.HIGH,
        f"Configuration changed by {tx.creator_msp} (tx {tx.tx_id[:12]})",
        (Evidence(EvidenceKind.TX, tx.tx_id),),
    )


def _runs(flags: list[bool]) -> list[tuple[int, int]]:
    """Maximal [start, end) index runs of consecutive True flags."""
    runs = []
    start = None
    for i, flag in enumerate(flags):
        if flag and start is None:
            start = i
        elif not flag and start is not None:
            runs.append((start, i))
            start = None
    if start is not None:
        runs.append((start, len(flags)))
    return runs


def rule_link_deviation(
    link: tuple[str, str], series: list[tuple[int, float]], cfg: RuleConfig
) -> list[Alert]:
    """One alert per maximal run of >= sustain consecutive per-minute
    evaluations with |deviation| >= threshold on a link."""
    flags = [abs(dev) >= cfg.link_dev_threshold for _, dev in series]
    alerts = []
    a, b = link
    for start, end in _runs(flags):
        if end - start < cfg.link_dev_sustain:
            continue
        onset_ts, onset_dev = series[start]
        alerts.append(_alert(
            "link_deviation",
            f"link_deviation|{a}->{b}|{onset_ts}",
            onset_ts,
            (ThreatCode.N1, ThreatCode.N2, ThreatCode.N3),
            Severity.WARNING,
            f"Gossip traffic deviation {onset_dev:+.3f} on link {a}<->{b}",
            (Evidence(EvidenceKind.LINK, f"{a}->{b}", (onset_ts - HOUR_MS, onset_ts)),),
        ))
    return alerts


def rule_tx_flood(buckets: list[TxBucket], cfg: RuleConfig) -> list[Alert]:
    """Per-minute totals above max(floor, multiplier x trailing median).

    Buckets with an empty trailing window are never evaluated, so a stream's
    very first minute cannot trip the rule.
    """
    totals = [b.total for b in buckets]
    flags = []
    thresholds: list[float] = []
    for i, bucket in enumerate(buckets):
        trailing = totals[max(0, i - cfg.flood_baseline_window):i]
        if not trailing:
            flags.append(False)
            thresholds.append(float("inf"))
            continue
        threshold = max(float(cfg.flood_min_count),
                        cfg.flood_multiplier * statistics.median(trailing))
        thresholds.append(threshold)
        flags.append(bucket.total > threshold)
    alerts = []
    for start, end in _runs(flags):
        onset = buckets[start]
        alerts.append(_alert(
            "tx_flood",
            f"tx_flood|{onset.bucket_start}",
            onset.bucket_start + MINUTE_MS,
            (ThreatCode.N2, ThreatCode.C2),
            Severity.HIGH,
            f"Transaction flood: {onset.total} tx/min against threshold "
            f"{thresholds[start]:.0f}",
            (Evidence(EvidenceKind.METRIC_WINDOW, "tx_count_per_min",
                      (onset.bucket_start, onset.bucket_start + MINUTE_MS)),),
        ))
    return alerts


def rule_tx_size(buckets: list[TxBucket], cfg: RuleConfig) -> list[Alert]:
    """Per-MSP mean transaction size above max(floor, multiplier x trailing
    median of that MSP's bucket means)."""
    msps: set[MspId] = set()
    for bucket in buckets:
        msps.update(bucket.avg_size_by_msp.keys())
    alerts = []
    for msp in sorted(msps):
        means = [b.avg_size_by_msp.get(msp) for b in buckets]
        flags = []
        onset_threshold: dict[int, float] = {}
        for i, mean in enumerate(means):
            if mean is None:
                flags.append(False)
                continue
            trailing = [m for m in means[max(0, i - cfg.flood_baseline_window):i] if m is not None]
            if not trailing:
                flags.append(False)
                continue
            threshold = max(float(cfg.size_min_bytes),
                            cfg.size_multiplier * statistics.median(trailing))
            onset_threshold[i] = threshold
            flags.append(mean > threshold)
        for start, end in _runs(flags):
            onset = buckets[start]
            alerts.append(_alert(
                "tx_size",
                f"tx_size|{msp}|{onset.bucket_start}",
                onset.bucket_start + MINUTE_MS,
                (ThreatCode.N2,),
                Severity.HIGH,
                f"Oversized transactions from {msp}: mean "
                f"{onset.avg_size_by_msp[msp]:.0f} B against threshold "
                f"{onset_threshold[start]:.0f} B",
                (Evidence(EvidenceKind.METRIC_WINDOW, f"avg_tx_size:{msp}",
                          (onset.bucket_start, onset.bucket_start + MINUTE_MS)),),
            ))
    return alerts


def rule_latency(buckets: list[LatencyBucket], cfg: RuleConfig) -> list[Alert]:
    """Sum of the three latency means above threshold; empty buckets are
    skipped and never alert."""
    sums = [b.total_seconds() for b in buckets]
    flags = [s is not None and s > cfg.latency_threshold_s for s in sums]
    alerts = []
    for start, end in _runs(flags):
        onset = buckets[start]
        alerts.append(_alert(
            "latency",
            f"latency|{onset.bucket_start}",
            onset.bucket_start + MINUTE_MS,
            (ThreatCode.N2,),
            Severity.WARNING,
            f"Transaction processing latency at {sums[start]:.1f} s end to end",
            (Evidence(EvidenceKind.METRIC_WINDOW, "tx_latency_sum",
                      (onset.bucket_start, onset.bucket_start + MINUTE_MS)),),
        ))
    return alerts


def parse_error_alert(stream: str, line_no: int, raw: str, raised_at: int) -> Alert:
    """Skipped-and-reported malformed source line (collection must degrade
    gracefully, but silently dropped data would blind the analyst)."""
    digest = hashlib.sha1(raw.encode(errors="replace")).hexdigest()[:10]
    return _alert(
        "ingest_parse_error",
        f"ingest_parse_error|{stream}|{line_no}|{digest}",
        raised_at,
        (ThreatCode.N3,),
        Severity.WARNING,
        f"Unparseable line {line_no} in {stream} feed (skipped)",
        (Evidence(EvidenceKind.SOURCE_LINE, f"{stream}:{line_no}"),),
    )


# -- full evaluation ------------------------------------------------------------

def _deterministic_report_id(cc: ChaincodeIR) -> str:
    from .store import ir_fingerprint

    return f"scan-{ir_fingerprint(cc)}"


def _scan_anchor(store: Store, now_ms: int) -> int:
    earliest = store.earliest_event_ts()
    base = earliest if earliest is not None else now_ms
    return align_down(base, Granularity.MIN_1) + MINUTE_MS


def evaluate_all(store: Store, cfg: RuleConfig, now_ms: int) -> list[Alert]:
    """Run every rule over data complete before ``now_ms``; persist and return
    only alerts not previously raised (exactly-once per condition instance).

    Stateless across calls: dedup rides on data-derived alert ids already in
    the store, so replaying any prefix is idempotent.
    """
    candidates: list[Alert] = []

    # Chaincode scans: one persisted report per IR version, deterministic id.
    anchor = _scan_anchor(store, now_ms)
    for name in sorted(store.chaincode_irs()):
        cc = store.chaincode_irs()[name]
        report_id = _deterministic_report_id(cc)
        if not store.has_scan_report(report_id):
            report = scan_chaincode(cc, report_id=report_id, scanned_at=anchor)
            store.append([report])
        else:
            report = next(r for r in store.scan_reports(name) if r.report_id == report_id)
        alert = rule_scan_findings(report)
        if alert:
            candidates.append(alert)

    for tx in store.config_transactions(now_ms):
        alert = rule_config_change(tx)
        if alert:
            candidates.append(alert)

    span = store.tx_time_span()
    if span:
        first, last = span
        start = align_down(first, Granularity.MIN_1)
        cap = min(align_down(now_ms, Granularity.MIN_1),
                  align_down(last, Granularity.MIN_1) + MINUTE_MS)
        if cap > start:
            txs = store.query_transactions(start, cap)
            buckets = bucket_transactions(txs, Granularity.MIN_1, start, cap)
            candidates.extend(rule_tx_flood(buckets, cfg))
            candidates.extend(rule_tx_size(buckets, cfg))

    lat_span = _latency_span(store)
    if lat_span:
        first, last = lat_span
        start = align_down(first, Granularity.MIN_1)
        cap = min(align_down(now_ms, Granularity.MIN_1),
                  align_down(last, Granularity.MIN_1) + MINUTE_MS)
        if cap > start:
            candidates.extend(rule_latency(
                latency_series(store, start, cap, Granularity.MIN_1), cfg))

    gossip_span = _gossip_span(store)
    if gossip_span:
        first, last = gossip_span
        m0 = align_down(first, Granularity.MIN_1) + MINUTE_MS
        m_end = min(align_down(now_ms, Granularity.MIN_1),
                    align_down(last, Granularity.MIN_1) + MINUTE_MS)
        minutes = range(m0, m_end + 1, MINUTE_MS)
        for link in store.gossip_links():
            series = [(m, link_stats(store, link, m).deviation) for m in minutes]
            candidates.extend(rule_link_deviation(link, series, cfg))

    fresh: list[Alert] = []
    seen: set[str] = set()
    for alert in candidates:
        if alert.alert_id in seen or store.has_alert(alert.alert_id):
            continue
        seen.add(alert.alert_id)
        fresh.append(alert)
    if fresh:
        store.append(fresh)
    return fresh


def _latency_span(store: Store) -> tuple[int, int] | None:
    from .model import LATENCY_SERIES

    firsts, lasts = [], []
    for series in LATENCY_SERIES:
        span = store.metric_time_span(series)
        if span:
            firsts.append(span[0])
            lasts.append(span[1])
    if not firsts:
        return None
    return (min(firsts), max(lasts))


def _gossip_span(store: Store) -> tuple[int, int] | None:
    from .model import MetricSeries

    return store.metric_time_span(MetricSeries.GOSSIP_SENT)


class DetectionEngine:
    """Single-flight wrapper the service's evaluation loop drives."""

    def __init__(self, store: Store, cfg: RuleConfig | None = None):
        self.store = store
        self.cfg = cfg or RuleConfig()
        self._lock = threading.Lock()

    def evaluate(self, now_ms: int | None = None) -> list[Alert]:
        if now_ms is None:
            now_ms = int(time.time() * 1000)
        with self._lock:
            return evaluate_all(self.store, self.cfg, now_ms)
