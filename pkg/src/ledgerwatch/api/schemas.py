"""Response models for the /api/v1 surface.

Field names and timestamp conventions mirror the store's canonical
serialization (lower_snake_case, integer milliseconds) so payloads need no
translation layer client-side.
"""

from __future__ import annotations

from pydantic import BaseModel


class StatusResponse(BaseModel):
    height: int | None
    last_block_time: int | None
    node_count: int
    msp_count: int
    alert_counts: dict[str, int]


class IssueOut(BaseModel):
    issue_id: str
    title: str
    priority: str
    status: str
    updated: int
    description: str


class EvidenceOut(BaseModel):
    kind: str
    ref: str
    window: tuple[int, int] | None = None


class AlertOut(BaseModel):
    alert_id: str
    raised_at: int
    rule: str
    threat_codes: list[str]
    severity: str
    summary: str
    evidence: list[EvidenceOut]


class GraphNodeOut(BaseModel):
    id: str
    msp: str
    kind: str
    local: bool
    border: bool


class GraphLinkOut(BaseModel):
    source: str
    target: str
    current: float | None
    baseline: float | None
    deviation: float


class NetworkResponse(BaseModel):
    generated_at: int
    nodes: list[GraphNodeOut]
    links: list[GraphLinkOut]


class LogLineOut(BaseModel):
    timestamp: int
    node: str
    level: str
    message: str


class LogsResponse(BaseModel):
    lines: list[LogLineOut]


class TxBucketOut(BaseModel):
    bucket_start: int
    total: int
    counts_by_msp: dict[str, int]
    avg_size_by_msp: dict[str, float]


class LatencyBucketOut(BaseModel):
    bucket_start: int
    endorsement_duration: float | None
    ordering_latency: float | None
    validation_duration: float | None


class ReadItemOut(BaseModel):
    key: str
    version: tuple[int, int]


class WriteItemOut(BaseModel):
    key: str
    value_hash: str
    is_delete: bool


class TransactionOut(BaseModel):
    tx_id: str
    block_num: int
    tx_index: int
    timestamp: int
    creator_msp: str
    chaincode: str
    tx_type: str
    size_bytes: int
    read_set: list[ReadItemOut]
    write_set: list[WriteItemOut]
    validation_code: str


class TransactionsResponse(BaseModel):
    from_ms: int
    to_ms: int
    granularity: str
    buckets: list[TxBucketOut]
    latency: list[LatencyBucketOut]
    rows: list[TransactionOut]
    row_total: int
    next_cursor: str | None


class FindingOut(BaseModel):
    rule: str
    function: str
    key_or_source: str
    severity: str


class ScanReportOut(BaseModel):
    report_id: str
    chaincode: str
    scanned_at: int
    findings: list[FindingOut]


class ScanSummaryOut(BaseModel):
    report_id: str
    scanned_at: int
    finding_count: int
    max_severity: str | None


class ChaincodeOut(BaseModel):
    name: str
    latest: ScanSummaryOut | None
