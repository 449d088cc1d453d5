"""Append-only event store with rebuildable in-memory indexes.

The on-disk format is the canonical .jsonl layout from :mod:`ledgerwatch.serde`,
so a simulator trace directory is a valid store directory. Source streams
(blocks, metrics, logs, chaincodes, issues) are fed through the ingest
adapters; scan reports and alerts are the store's own output streams and are
reloaded from disk on open.

Concurrency: single writer, many readers. All index mutations and reads are
guarded by one re-entrant lock; readers always observe whole events.
"""

from __future__ import annotations

import bisect
import hashlib
import os
import threading
from collections import defaultdict
from pathlib import Path
from typing import Any, Iterable, Sequence

from . import serde
from .model import (
    Alert,
    Block,
    ChaincodeIR,
    Issue,
    LogLevel,
    LogLine,
    MetricSample,
    MetricSeries,
    MspId,
    ScanReport,
    StreamViolation,
    Transaction,
    TxType,
    ViolationKind,
    validate_stream,
)


class StoreError(Exception):
    pass


class DuplicateEventError(StoreError):
    pass


class ValidationFailedError(StoreError):
    def __init__(self, violations: list[StreamViolation]):
        super().__init__("; ".join(f"{v.kind.value}@{v.block}: {v.detail}" for v in violations))
        self.violations = violations


class InvalidRangeError(StoreError):
    pass


def ir_fingerprint(cc: ChaincodeIR) -> str:
    """Stable content hash of a chaincode IR (name + ops)."""
    return hashlib.sha1(serde.encode_line(serde.CHAINCODES, cc).encode()).hexdigest()[:16]


class _SeriesIndex:
    """Time-sorted samples of one metric series, with lazy prefix sums."""

    __slots__ = ("times", "samples", "_cumsum")

    def __init__(self):
        self.times: list[int] = []
        self.samples: list[MetricSample] = []
        self._cumsum: list[float] | None = None

    def add(self, sample: MetricSample) -> None:
        if self.times and sample.timestamp < self.times[-1]:
            pos = bisect.bisect_right(self.times, sample.timestamp)
            self.times.insert(pos, sample.timestamp)
            self.samples.insert(pos, sample)
        else:
            self.times.append(sample.timestamp)
            self.samples.append(sample)
        self._cumsum = None

    def slice(self, from_ms: int, to_ms: int) -> list[MetricSample]:
        lo = bisect.bisect_left(self.times, from_ms)
        hi = bisect.bisect_left(self.times, to_ms)
        return self.samples[lo:hi]

    def value_sum(self, from_ms: int, to_ms: int) -> float:
        if self._cumsum is None:
            acc = 0.0
            cs = [0.0]
            for s in self.samples:
                acc += s.value
                cs.append(acc)
            self._cumsum = cs
        lo = bisect.bisect_left(self.times, from_ms)
        hi = bisect.bisect_left(self.times, to_ms)
        return self._cumsum[hi] - self._cumsum[lo]


def link_key(a: str, b: str) -> tuple[str, str]:
    """Canonical unordered link identity for a gossip node pair."""
    return (a, b) if a <= b else (b, a)


class Store:
    """System of record: durable event log plus query indexes.

    ``data_dir=None`` gives a purely in-memory store (used by offline
    replay so detection never mutates the trace directory).
    """

    def __init__(self, data_dir: str | Path | None):
        self.data_dir = Path(data_dir) if data_dir is not None else None
        self._lock = threading.RLock()
        self._files: dict[str, Any] = {}
        self._seq = 0

        self._blocks: list[Block] = []
        self._block_numbers: set[int] = set()

        self._txs: list[Transaction] = []
        self._tx_times: list[int] = []
        self._tx_ids: set[str] = set()
        self._tx_by_chaincode: dict[str, list[int]] = defaultdict(list)
        self._tx_by_msp: dict[MspId, list[int]] = defaultdict(list)
        self._config_tx_idx: list[int] = []

        self._series: dict[MetricSeries, _SeriesIndex] = defaultdict(_SeriesIndex)
        self._links: dict[tuple[str, str], _SeriesIndex] = defaultdict(_SeriesIndex)
        self._metric_keys: set[tuple] = set()

        self._logs: list[LogLine] = []
        self._log_times: list[int] = []

        self._chaincodes: dict[str, list[ChaincodeIR]] = defaultdict(list)
        self._cc_keys: set[tuple[str, str]] = set()

        self._scans: list[ScanReport] = []
        self._scan_ids: set[str] = set()
        self._scans_by_cc: dict[str, list[int]] = defaultdict(list)

        self._alerts: list[Alert] = []
        self._alert_ids: set[str] = set()

        self._issues: list[Issue] = []
        self._issue_keys: set[tuple[str, int]] = set()

        if self.data_dir is not None:
            self.data_dir.mkdir(parents=True, exist_ok=True)
            self._load_own_streams()

    # -- persistence ------------------------------------------------------

    def _load_own_streams(self) -> None:
        for stream in (serde.SCANS, serde.ALERTS):
            path = self.data_dir / serde.STREAM_FILES[stream]
            if not path.exists():
                continue
            with path.open("r", encoding="utf-8") as fh:
                for line in fh:
                    line = line.strip()
                    if not line:
                        continue
                    event = serde.decode_line(stream, line)
                    self._index_one(stream, event, from_tail=True)
                    self._seq += 1

    def _file(self, stream: str):
        fh = self._files.get(stream)
        if fh is None:
            path = self.data_dir / serde.STREAM_FILES[stream]
            fh = path.open("a", encoding="utf-8")
            self._files[stream] = fh
        return fh

    def _persist(self, stream: str, events: list[Any]) -> None:
        if self.data_dir is None:
            return
        fh = self._file(stream)
        for event in events:
            fh.write(serde.encode_line(stream, event) + "\n")
        fh.flush()
        os.fsync(fh.fileno())

    def close(self) -> None:
        with self._lock:
            for fh in self._files.values():
                fh.close()
            self._files.clear()

    # -- append -----------------------------------------------------------

    @staticmethod
    def _stream_of(event: Any) -> str:
        if isinstance(event, Block):
            return serde.BLOCKS
        if isinstance(event, MetricSample):
            return serde.METRICS
        if isinstance(event, LogLine):
            return serde.LOGS
        if isinstance(event, ChaincodeIR):
            return serde.CHAINCODES
        if isinstance(event, Issue):
            return serde.ISSUES
        if isinstance(event, ScanReport):
            return serde.SCANS
        if isinstance(event, Alert):
            return serde.ALERTS
        raise TypeError(f"not a store event: {type(event).__name__}")

    def append(self, events: Sequence[Any], *, already_persisted: bool = False) -> int:
        """Validate, persist and index ``events``; returns the new sequence number.

        Duplicate natural keys raise :class:`DuplicateEventError` on the write
        path; on the tail path (``already_persisted``) duplicates are skipped
        silently so that re-reading the store's own files stays idempotent.
        """
        with self._lock:
            per_stream: dict[str, list[Any]] = defaultdict(list)
            pending_keys: set[tuple] = set()
            accepted: list[tuple[str, Any]] = []
            for event in events:
                stream = self._stream_of(event)
                key = self._natural_key(stream, event)
                if key is not None and (key in pending_keys or self._has_key(stream, key)):
                    if already_persisted:
                        continue
                    raise DuplicateEventError(f"{stream}: duplicate natural key {key!r}")
                if key is not None:
                    pending_keys.add(key)
                per_stream[stream].append(event)
                accepted.append((stream, event))

            new_blocks = per_stream.get(serde.BLOCKS, [])
            if new_blocks:
                expected = (max(self._block_numbers) + 1) if self._block_numbers else 0
                violations = validate_stream(new_blocks, expected_start=expected)
                first = new_blocks[0]
                if (
                    self._blocks
                    and first.number == expected
                    and first.prev_hash != self._blocks[-1].data_hash
                ):
                    violations.append(StreamViolation(
                        ViolationKind.HASH_CHAIN, first.number,
                        "prev_hash does not match the stored tip's data_hash"))
                if violations:
                    raise ValidationFailedError(violations)

            if not already_persisted:
                for stream, batch in per_stream.items():
                    self._persist(stream, batch)
            for stream, event in accepted:
                self._index_one(stream, event, from_tail=already_persisted)
                self._seq += 1
            return self._seq

    def _natural_key(self, stream: str, event: Any) -> tuple | None:
        if stream == serde.BLOCKS:
            return (stream, event.number)
        if stream == serde.METRICS:
            return (stream, event.series, event.labels, event.timestamp)
        if stream == serde.CHAINCODES:
            return (stream, event.name, ir_fingerprint(event))
        if stream == serde.ISSUES:
            return (stream, event.issue_id, event.updated)
        if stream == serde.SCANS:
            return (stream, event.report_id)
        if stream == serde.ALERTS:
            return (stream, event.alert_id)
        return None  # logs are unkeyed

    def _has_key(self, stream: str, key: tuple) -> bool:
        if stream == serde.BLOCKS:
            return key[1] in self._block_numbers
        if stream == serde.METRICS:
            return key[1:] in self._metric_keys
        if stream == serde.CHAINCODES:
            return key[1:] in self._cc_keys
        if stream == serde.ISSUES:
            return key[1:] in self._issue_keys
        if stream == serde.SCANS:
            return key[1] in self._scan_ids
        if stream == serde.ALERTS:
            return key[1] in self._alert_ids
        return False

    def _index_one(self, stream: str, event: Any, *, from_tail: bool) -> None:
        if stream == serde.BLOCKS:
            self._blocks.append(event)
            self._block_numbers.add(event.number)
            for tx in event.transactions:
                idx = len(self._txs)
                self._txs.append(tx)
                self._tx_times.append(tx.timestamp)
                self._tx_ids.add(tx.tx_id)
                if tx.chaincode:
                    self._tx_by_chaincode[tx.chaincode].append(idx)
                self._tx_by_msp[tx.creator_msp].append(idx)
                if tx.tx_type is TxType.CONFIG:
                    self._config_tx_idx.append(idx)
        elif stream == serde.METRICS:
            self._metric_keys.add((event.series, event.labels, event.timestamp))
            self._series[event.series].add(event)
            if event.series is MetricSeries.GOSSIP_SENT:
                key = link_key(event.label("source"), event.label("target"))
                self._links[key].add(event)
        elif stream == serde.LOGS:
            if self._log_times and event.timestamp < self._log_times[-1]:
                pos = bisect.bisect_right(self._log_times, event.timestamp)
                self._log_times.insert(pos, event.timestamp)
                self._logs.insert(pos, event)
            else:
                self._log_times.append(event.timestamp)
                self._logs.append(event)
        elif stream == serde.CHAINCODES:
            self._cc_keys.add((event.name, ir_fingerprint(event)))
            self._chaincodes[event.name].append(event)
        elif stream == serde.ISSUES:
            self._issue_keys.add((event.issue_id, event.updated))
            self._issues.append(event)
        elif stream == serde.SCANS:
            self._scan_ids.add(event.report_id)
            self._scans_by_cc[event.chaincode].append(len(self._scans))
            self._scans.append(event)
        elif stream == serde.ALERTS:
            self._alert_ids.add(event.alert_id)
            self._alerts.append(event)

    # -- queries: ledger ----------------------------------------------------

    @staticmethod
    def _check_range(from_ms: int, to_ms: int) -> None:
        if from_ms > to_ms:
            raise InvalidRangeError(f"from {from_ms} > to {to_ms}")

    def query_transactions(
        self,
        from_ms: int,
        to_ms: int,
        *,
        chaincode: str | None = None,
        msp: MspId | None = None,
        tx_type: TxType | None = None,
    ) -> list[Transaction]:
        """Transactions in [from, to) matching every given predicate,
        ordered by (block_num, tx_index)."""
        self._check_range(from_ms, to_ms)
        with self._lock:
            if chaincode is not None:
                candidates = [self._txs[i] for i in self._tx_by_chaincode.get(chaincode, [])]
            elif msp is not None:
                candidates = [self._txs[i] for i in self._tx_by_msp.get(msp, [])]
            else:
                lo = bisect.bisect_left(self._tx_times, from_ms)
                hi = bisect.bisect_left(self._tx_times, to_ms)
                candidates = self._txs[lo:hi]
            out = [
                tx
                for tx in candidates
                if from_ms <= tx.timestamp < to_ms
                and (chaincode is None or tx.chaincode == chaincode)
                and (msp is None or tx.creator_msp == msp)
                and (tx_type is None or tx.tx_type is tx_type)
            ]
            out.sort(key=lambda t: (t.block_num, t.tx_index))
            return out

    def config_transactions(self, before_ms: int) -> list[Transaction]:
        with self._lock:
            return [
                self._txs[i] for i in self._config_tx_idx
                if self._txs[i].timestamp < before_ms
            ]

    def height(self) -> int | None:
        with self._lock:
            return self._blocks[-1].number if self._blocks else None

    def last_block_time(self) -> int | None:
        with self._lock:
            return self._blocks[-1].timestamp if self._blocks else None

    def blocks(self) -> list[Block]:
        with self._lock:
            return list(self._blocks)

    def tx_count(self) -> int:
        with self._lock:
            return len(self._txs)

    def tx_time_span(self) -> tuple[int, int] | None:
        with self._lock:
            if not self._tx_times:
                return None
            return (self._tx_times[0], self._tx_times[-1])

    # -- queries: metrics ---------------------------------------------------

    def query_metrics(
        self,
        series: MetricSeries,
        from_ms: int,
        to_ms: int,
        *,
        labels: dict[str, str] | None = None,
    ) -> list[MetricSample]:
        """Samples of ``series`` in [from, to) matching all given labels."""
        self._check_range(from_ms, to_ms)
        with self._lock:
            found = self._series[series].slice(from_ms, to_ms) if series in self._series else []
            if labels:
                items = labels.items()
                found = [s for s in found if all((k, v) in s.labels for k, v in items)]
            return list(found)

    def link_traffic(self, a: str, b: str, from_ms: int, to_ms: int) -> float:
        """Sum of GOSSIP_SENT values in [from, to) over both directions of a link."""
        self._check_range(from_ms, to_ms)
        with self._lock:
            idx = self._links.get(link_key(a, b))
            return idx.value_sum(from_ms, to_ms) if idx else 0.0

    def gossip_links(self) -> list[tuple[str, str]]:
        with self._lock:
            return sorted(self._links.keys())

    def gossip_nodes(self) -> set[str]:
        with self._lock:
            out: set[str] = set()
            for a, b in self._links:
                out.add(a)
                out.add(b)
            return out

    def earliest_gossip_ts(self) -> int | None:
        with self._lock:
            firsts = [idx.times[0] for idx in self._links.values() if idx.times]
            return min(firsts) if firsts else None

    def earliest_metric_ts(self, series: MetricSeries) -> int | None:
        with self._lock:
            idx = self._series.get(series)
            return idx.times[0] if idx and idx.times else None

    def metric_time_span(self, series: MetricSeries) -> tuple[int, int] | None:
        with self._lock:
            idx = self._series.get(series)
            if not idx or not idx.times:
                return None
            return (idx.times[0], idx.times[-1])

    def earliest_event_ts(self) -> int | None:
        with self._lock:
            candidates = []
            if self._tx_times:
                candidates.append(self._tx_times[0])
            if self._log_times:
                candidates.append(self._log_times[0])
            candidates.extend(idx.times[0] for idx in self._series.values() if idx.times)
            return min(candidates) if candidates else None

    def latest_event_ts(self) -> int | None:
        with self._lock:
            candidates = []
            if self._blocks:
                candidates.append(self._blocks[-1].timestamp)
            if self._log_times:
                candidates.append(self._log_times[-1])
            candidates.extend(idx.times[-1] for idx in self._series.values() if idx.times)
            return max(candidates) if candidates else None

    # -- queries: logs ------------------------------------------------------

    def query_logs(
        self,
        *,
        node: str | None = None,
        level_min: LogLevel = LogLevel.DEBUG,
        from_ms: int = 0,
        to_ms: int = 1 << 62,
        limit: int = 100,
    ) -> list[LogLine]:
        """Most recent matching lines, newest first, up to ``limit`` (<= 10000)."""
        self._check_range(from_ms, to_ms)
        if limit <= 0 or limit > 10000:
            raise InvalidRangeError("limit must be in 1..10000")
        with self._lock:
            lo = bisect.bisect_left(self._log_times, from_ms)
            hi = bisect.bisect_left(self._log_times, to_ms)
            out: list[LogLine] = []
            for i in range(hi - 1, lo - 1, -1):
                line = self._logs[i]
                if node is not None and line.node != node:
                    continue
                if line.level.rank < level_min.rank:
                    continue
                out.append(line)
                if len(out) >= limit:
                    break
            return out

    # -- queries: chaincodes, scans, issues, alerts --------------------------

    def chaincode_irs(self) -> dict[str, ChaincodeIR]:
        """Latest IR version per chaincode name."""
        with self._lock:
            return {name: versions[-1] for name, versions in self._chaincodes.items()}

    def chaincode_names(self) -> list[str]:
        """Names known from IRs or seen on transactions."""
        with self._lock:
            names = set(self._chaincodes.keys())
            names.update(self._tx_by_chaincode.keys())
            return sorted(names)

    def scan_reports(self, chaincode: str) -> list[ScanReport]:
        """Reports for one chaincode, newest first (ties: latest appended first)."""
        with self._lock:
            idxs = self._scans_by_cc.get(chaincode, [])
            return [
                self._scans[i]
                for i in sorted(idxs, key=lambda i: (self._scans[i].scanned_at, i), reverse=True)
            ]

    def latest_scan_report(self, chaincode: str) -> ScanReport | None:
        reports = self.scan_reports(chaincode)
        return reports[0] if reports else None

    def has_scan_report(self, report_id: str) -> bool:
        with self._lock:
            return report_id in self._scan_ids

    def issues(self) -> list[Issue]:
        """Latest version of each issue in the feed."""
        with self._lock:
            latest: dict[str, Issue] = {}
            for issue in self._issues:
                cur = latest.get(issue.issue_id)
                if cur is None or issue.updated >= cur.updated:
                    latest[issue.issue_id] = issue
            return list(latest.values())

    def alerts(self) -> list[Alert]:
        with self._lock:
            return list(self._alerts)

    def alerts_since(self, since_ms: int) -> list[Alert]:
        """Alerts raised at or after ``since_ms``, newest first."""
        with self._lock:
            found = [a for a in self._alerts if a.raised_at >= since_ms]
            found.sort(key=lambda a: a.raised_at, reverse=True)
            return found

    def alert_count(self) -> int:
        with self._lock:
            return len(self._alerts)

    def alert_at(self, index: int) -> Alert:
        with self._lock:
            return self._alerts[index]

    def has_alert(self, alert_id: str) -> bool:
        with self._lock:
            return alert_id in self._alert_ids

    def alert_counts_by_severity(self) -> dict[str, int]:
        with self._lock:
            counts = {"INFO": 0, "WARNING": 0, "HIGH": 0}
            for alert in self._alerts:
                counts[alert.severity.value] += 1
            return counts
