"""Core domain types shared by every subsystem.

All timestamps are integer UTC milliseconds. Model values are immutable
after construction and safe to share across threads. Field-local sanity
checks raise ``ValueError`` at construction time; cross-event stream
invariants are checked by :func:`validate_stream`, which reports
violations as data instead of raising.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

# An MSP is identified by its (non-empty) organization name.
MspId = str


class NodeKind(Enum):
    PEER = "PEER"
    ORDERER = "ORDERER"


class TxType(Enum):
    ENDORSER = "ENDORSER"
    CONFIG = "CONFIG"


class ValidationCode(Enum):
    VALID = "VALID"
    INVALID_MVCC = "INVALID_MVCC"
    INVALID_OTHER = "INVALID_OTHER"


class MetricSeries(Enum):
    GOSSIP_SENT = "GOSSIP_SENT"
    ENDORSEMENT_DURATION = "ENDORSEMENT_DURATION"
    ORDERING_LATENCY = "ORDERING_LATENCY"
    VALIDATION_DURATION = "VALIDATION_DURATION"


LATENCY_SERIES = (
    MetricSeries.ENDORSEMENT_DURATION,
    MetricSeries.ORDERING_LATENCY,
    MetricSeries.VALIDATION_DURATION,
)


class LogLevel(Enum):
    DEBUG = "DEBUG"
    INFO = "INFO"
    WARN = "WARN"
    ERROR = "ERROR"

    @property
    def rank(self) -> int:
        return _LEVEL_RANK[self]


_LEVEL_RANK = {
    LogLevel.DEBUG: 0,
    LogLevel.INFO: 1,
    LogLevel.WARN: 2,
    LogLevel.ERROR: 3,
}


class ThreatBranch(Enum):
    SMART_CONTRACT = "SMART_CONTRACT"
    NETWORK = "NETWORK"
    CONSENSUS = "CONSENSUS"
    ACCESS_CONTROL = "ACCESS_CONTROL"


class ThreatCode(Enum):
    SC1 = "SC1"
    SC2 = "SC2"
    SC3 = "SC3"
    SC4 = "SC4"
    N1 = "N1"
    N2 = "N2"
    N3 = "N3"
    C1 = "C1"
    C2 = "C2"
    C3 = "C3"
    C4 = "C4"
    AC1 = "AC1"
    AC2 = "AC2"
    AC3 = "AC3"
    AC4 = "AC4"

    @property
    def branch(self) -> ThreatBranch:
        # Prefix order matters: SC before C, AC before C.
        name = self.value
        if name.startswith("SC"):
            return ThreatBranch.SMART_CONTRACT
        if name.startswith("AC"):
            return ThreatBranch.ACCESS_CONTROL
        if name.startswith("N"):
            return ThreatBranch.NETWORK
        return ThreatBranch.CONSENSUS


class Severity(Enum):
    INFO = "INFO"
    WARNING = "WARNING"
    HIGH = "HIGH"


class IssuePriority(Enum):
    LOWEST = "LOWEST"
    LOW = "LOW"
    MEDIUM = "MEDIUM"
    HIGH = "HIGH"
    HIGHEST = "HIGHEST"


class ScanRule(Enum):
    READ_AFTER_WRITE = "READ_AFTER_WRITE"
    NONDETERMINISM = "NONDETERMINISM"


class FindingSeverity(Enum):
    LOW = "LOW"
    MEDIUM = "MEDIUM"
    HIGH = "HIGH"


@dataclass(frozen=True)
class NodeRef:
    """One peer or orderer; ``local`` marks the monitoring org's own nodes."""

    id: str
    msp: MspId
    kind: NodeKind
    local: bool

    def __post_init__(self):
        if not self.id:
            raise ValueError("node id must be non-empty")
        if not self.msp:
            raise ValueError("node msp must be non-empty")


@dataclass(frozen=True)
class ReadItem:
    key: str
    version: tuple[int, int]  # (block, tx) the read value was written at


@dataclass(frozen=True)
class WriteItem:
    key: str
    value_hash: str
    is_delete: bool = False


@dataclass(frozen=True)
class Transaction:
    tx_id: str
    block_num: int
    tx_index: int
    timestamp: int
    creator_msp: MspId
    chaincode: str
    tx_type: TxType
    size_bytes: int
    read_set: tuple[ReadItem, ...] = ()
    write_set: tuple[WriteItem, ...] = ()
    validation_code: ValidationCode = ValidationCode.VALID

    def __post_init__(self):
        if not self.tx_id:
            raise ValueError("tx_id must be non-empty")
        if self.block_num < 0 or self.tx_index < 0:
            raise ValueError("block_num and tx_index must be non-negative")
        if self.size_bytes <= 0:
            raise ValueError("size_bytes must be positive")
        if self.tx_type is TxType.CONFIG and self.chaincode:
            raise ValueError("config transactions carry no chaincode")
        if not self.creator_msp:
            raise ValueError("creator_msp must be non-empty")


@dataclass(frozen=True)
class Block:
    number: int
    prev_hash: str
    data_hash: str
    timestamp: int
    tx_count: int
    transactions: tuple[Transaction, ...]

    def __post_init__(self):
        if self.number < 0:
            raise ValueError("block number must be non-negative")
        if self.tx_count <= 0:
            raise ValueError("tx_count must be positive")


@dataclass(frozen=True)
class MetricSample:
    timestamp: int
    series: MetricSeries
    labels: tuple[tuple[str, str], ...]  # sorted (key, value) pairs
    value: float

    def __post_init__(self):
        if not math.isfinite(self.value) or self.value < 0:
            raise ValueError("metric value must be finite and non-negative")
        keys = {k for k, _ in self.labels}
        if self.series is MetricSeries.GOSSIP_SENT:
            if "source" not in keys or "target" not in keys:
                raise ValueError("GOSSIP_SENT samples need source and target labels")
        elif self.labels:
            raise ValueError(f"{self.series.value} samples carry no labels")

    def label(self, key: str) -> str:
        for k, v in self.labels:
            if k == key:
                return v
        raise KeyError(key)


def gossip_sample(timestamp: int, source: str, target: str, value: float) -> MetricSample:
    labels = tuple(sorted({"source": source, "target": target}.items()))
    return MetricSample(timestamp, MetricSeries.GOSSIP_SENT, labels, value)


@dataclass(frozen=True)
class LogLine:
    timestamp: int
    node: str
    level: LogLevel
    message: str


class EvidenceKind(Enum):
    TX = "TX"
    BLOCK = "BLOCK"
    LINK = "LINK"
    SCAN_REPORT = "SCAN_REPORT"
    METRIC_WINDOW = "METRIC_WINDOW"
    SOURCE_LINE = "SOURCE_LINE"


@dataclass(frozen=True)
class Evidence:
    """Typed reference from an alert back to the data that triggered it.

    ``ref`` holds the natural identifier (tx id, block number, "a->b" link,
    report id, series/MSP name, or source file line); ``window`` is the
    half-open [start, end) data window for windowed rules.
    """

    kind: EvidenceKind
    ref: str
    window: tuple[int, int] | None = None


@dataclass(frozen=True)
class Alert:
    alert_id: str
    raised_at: int
    rule: str
    threat_codes: tuple[ThreatCode, ...]
    severity: Severity
    summary: str
    evidence: tuple[Evidence, ...]

    def __post_init__(self):
        if not self.alert_id:
            raise ValueError("alert_id must be non-empty")
        if not self.threat_codes:
            raise ValueError("alerts must carry at least one threat code")
        if not self.evidence:
            raise ValueError("alerts must carry evidence")


@dataclass(frozen=True)
class Finding:
    rule: ScanRule
    function: str
    key_or_source: str
    severity: FindingSeverity


@dataclass(frozen=True)
class ScanReport:
    report_id: str
    chaincode: str
    scanned_at: int
    findings: tuple[Finding, ...] = ()  # empty findings == clean scan


@dataclass(frozen=True)
class Issue:
    issue_id: str
    title: str
    priority: IssuePriority
    status: str
    updated: int
    description: str = ""

    def __post_init__(self):
        if not self.issue_id:
            raise ValueError("issue_id must be non-empty")


class CcOpKind(Enum):
    READ = "READ"
    WRITE = "WRITE"
    RANGE_READ = "RANGE_READ"
    RANDOM = "RANDOM"
    TIMESTAMP = "TIMESTAMP"
    OTHER = "OTHER"


@dataclass(frozen=True)
class CcOp:
    kind: CcOpKind
    arg: str = ""  # key for READ/WRITE, prefix for RANGE_READ, else empty


@dataclass(frozen=True)
class CcFunction:
    name: str
    ops: tuple[CcOp, ...]


@dataclass(frozen=True)
class ChaincodeIR:
    """Operation-level view of one chaincode, as fed to the static scanner."""

    name: str
    functions: tuple[CcFunction, ...]

    def __post_init__(self):
        names = [f.name for f in self.functions]
        if len(names) != len(set(names)):
            raise ValueError("function names must be unique within a chaincode")


class ViolationKind(Enum):
    GAP = "GAP"
    HASH_CHAIN = "HASH_CHAIN"
    TX_COUNT = "TX_COUNT"
    TX_BLOCK_NUM = "TX_BLOCK_NUM"
    TX_INDEX = "TX_INDEX"
    TIMESTAMP_ORDER = "TIMESTAMP_ORDER"


@dataclass(frozen=True)
class StreamViolation:
    kind: ViolationKind
    block: int
    detail: str


def validate_stream(blocks: list[Block], expected_start: int | None = None) -> list[StreamViolation]:
    """Check block-number continuity, hash chaining and per-block invariants.

    Violations are returned as data (an empty list means well-formed).
    ``expected_start`` pins the first block's number (the store passes its
    tip + 1); when None, only continuity within the list is checked.
    """
    violations: list[StreamViolation] = []
    prev: Block | None = None
    for block in blocks:
        if prev is None:
            if expected_start is not None and block.number != expected_start:
                violations.append(StreamViolation(
                    ViolationKind.GAP, expected_start,
                    f"expected block {expected_start}, got {block.number}"))
        else:
            if block.number != prev.number + 1:
                violations.append(StreamViolation(
                    ViolationKind.GAP, prev.number + 1,
                    f"expected block {prev.number + 1}, got {block.number}"))
            elif block.prev_hash != prev.data_hash:
                violations.append(StreamViolation(
                    ViolationKind.HASH_CHAIN, block.number,
                    f"prev_hash does not match data_hash of block {prev.number}"))
        violations.extend(_check_block(block))
        prev = block
    return violations


def _check_block(block: Block) -> list[StreamViolation]:
    out: list[StreamViolation] = []
    if block.tx_count != len(block.transactions):
        out.append(StreamViolation(
            ViolationKind.TX_COUNT, block.number,
            f"tx_count {block.tx_count} != {len(block.transactions)} transactions"))
    last_ts: int | None = None
    for pos, tx in enumerate(block.transactions):
        if tx.block_num != block.number:
            out.append(StreamViolation(
                ViolationKind.TX_BLOCK_NUM, block.number,
                f"tx {tx.tx_id} carries block_num {tx.block_num}"))
        if tx.tx_index != pos:
            out.append(StreamViolation(
                ViolationKind.TX_INDEX, block.number,
                f"tx at position {pos} carries tx_index {tx.tx_index}"))
        if last_ts is not None and tx.timestamp < last_ts:
            out.append(StreamViolation(
                ViolationKind.TIMESTAMP_ORDER, block.number,
                f"tx {tx.tx_id} timestamp decreases within block"))
        last_ts = tx.timestamp
    return out
