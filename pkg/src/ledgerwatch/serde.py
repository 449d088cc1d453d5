"""Canonical event serialization: newline-delimited JSON, UTF-8.

One event per line, lower_snake_case field names, timestamps as integer
milliseconds. This is the store's on-disk format and, byte for byte, the
simulator's trace output format, so a trace directory is a valid store
directory.
"""

from __future__ import annotations

import json
from typing import Any, Callable

from .model import (
    Alert,
    Block,
    CcFunction,
    CcOp,
    CcOpKind,
    ChaincodeIR,
    Evidence,
    EvidenceKind,
    Finding,
    FindingSeverity,
    Issue,
    IssuePriority,
    LogLevel,
    LogLine,
    MetricSample,
    MetricSeries,
    ReadItem,
    ScanReport,
    ScanRule,
    Severity,
    ThreatCode,
    Transaction,
    TxType,
    ValidationCode,
    WriteItem,
)

# Stream names double as the .jsonl file stems inside a data directory.
BLOCKS = "blocks"
METRICS = "metrics"
LOGS = "logs"
CHAINCODES = "chaincodes"
ISSUES = "issues"
SCANS = "scans"
ALERTS = "alerts"

STREAM_FILES = {
    BLOCKS: "blocks.jsonl",
    METRICS: "metrics.jsonl",
    LOGS: "logs.jsonl",
    CHAINCODES: "chaincodes.jsonl",
    ISSUES: "issues.jsonl",
    SCANS: "scans.jsonl",
    ALERTS: "alerts.jsonl",
}


def dumps(obj: dict[str, Any]) -> str:
    return json.dumps(obj, separators=(",", ":"), sort_keys=True)


def tx_to_dict(tx: Transaction) -> dict[str, Any]:
    return {
        "tx_id": tx.tx_id,
        "block_num": tx.block_num,
        "tx_index": tx.tx_index,
        "timestamp": tx.timestamp,
        "creator_msp": tx.creator_msp,
        "chaincode": tx.chaincode,
        "tx_type": tx.tx_type.value,
        "size_bytes": tx.size_bytes,
        "read_set": [
            {"key": r.key, "version": [r.version[0], r.version[1]]} for r in tx.read_set
        ],
        "write_set": [
            {"key": w.key, "value_hash": w.value_hash, "is_delete": w.is_delete}
            for w in tx.write_set
        ],
        "validation_code": tx.validation_code.value,
    }


def tx_from_dict(d: dict[str, Any]) -> Transaction:
    return Transaction(
        tx_id=d["tx_id"],
        block_num=int(d["block_num"]),
        tx_index=int(d["tx_index"]),
        timestamp=int(d["timestamp"]),
        creator_msp=d["creator_msp"],
        chaincode=d["chaincode"],
        tx_type=TxType(d["tx_type"]),
        size_bytes=int(d["size_bytes"]),
        read_set=tuple(
            ReadItem(r["key"], (int(r["version"][0]), int(r["version"][1])))
            for r in d.get("read_set", [])
        ),
        write_set=tuple(
            WriteItem(w["key"], w["value_hash"], bool(w["is_delete"]))
            for w in d.get("write_set", [])
        ),
        validation_code=ValidationCode(d["validation_code"]),
    )


def block_to_dict(block: Block) -> dict[str, Any]:
    return {
        "number": block.number,
        "prev_hash": block.prev_hash,
        "data_hash": block.data_hash,
        "timestamp": block.timestamp,
        "tx_count": block.tx_count,
        "transactions": [tx_to_dict(tx) for tx in block.transactions],
    }


def block_from_dict(d: dict[str, Any]) -> Block:
    return Block(
        number=int(d["number"]),
        prev_hash=d["prev_hash"],
        data_hash=d["data_hash"],
        timestamp=int(d["timestamp"]),
        tx_count=int(d["tx_count"]),
        transactions=tuple(tx_from_dict(t) for t in d.get("transactions", [])),
    )


def metric_to_dict(sample: MetricSample) -> dict[str, Any]:
    return {
        "timestamp": sample.timestamp,
        "series": sample.series.value,
        "labels": dict(sample.labels),
        "value": sample.value,
    }


def metric_from_dict(d: dict[str, Any]) -> MetricSample:
    return MetricSample(
        timestamp=int(d["timestamp"]),
        series=MetricSeries(d["series"]),
        labels=tuple(sorted(d.get("labels", {}).items())),
        value=float(d["value"]),
    )


def log_to_dict(line: LogLine) -> dict[str, Any]:
    return {
        "timestamp": line.timestamp,
        "node": line.node,
        "level": line.level.value,
        "message": line.message,
    }


def log_from_dict(d: dict[str, Any]) -> LogLine:
    return LogLine(
        timestamp=int(d["timestamp"]),
        node=d["node"],
        level=LogLevel(d["level"]),
        message=d["message"],
    )


def chaincode_to_dict(cc: ChaincodeIR) -> dict[str, Any]:
    return {
        "name": cc.name,
        "functions": [
            {"name": f.name, "ops": [{"kind": op.kind.value, "arg": op.arg} for op in f.ops]}
            for f in cc.functions
        ],
    }


def chaincode_from_dict(d: dict[str, Any]) -> ChaincodeIR:
    return ChaincodeIR(
        name=d["name"],
        functions=tuple(
            CcFunction(
                f["name"],
                tuple(CcOp(CcOpKind(op["kind"]), op.get("arg", "")) for op in f.get("ops", [])),
            )
            for f in d.get("functions", [])
        ),
    )


def issue_to_dict(issue: Issue) -> dict[str, Any]:
    return {
        "issue_id": issue.issue_id,
        "title": issue.title,
        "priority": issue.priority.value,
        "status": issue.status,
        "updated": issue.updated,
        "description": issue.description,
    }


def issue_from_dict(d: dict[str, Any]) -> Issue:
    return Issue(
        issue_id=d["issue_id"],
        title=d["title"],
        priority=IssuePriority(d["priority"]),
        status=d["status"],
        updated=int(d["updated"]),
        description=d.get("description", ""),
    )


def scan_to_dict(report: ScanReport) -> dict[str, Any]:
    return {
        "report_id": report.report_id,
        "chaincode": report.chaincode,
        "scanned_at": report.scanned_at,
        "findings": [
            {
                "rule": f.rule.value,
                "function": f.function,
                "key_or_source": f.key_or_source,
                "severity": f.severity.value,
            }
            for f in report.findings
        ],
    }


def scan_from_dict(d: dict[str, Any]) -> ScanReport:
    return ScanReport(
        report_id=d["report_id"],
        chaincode=d["chaincode"],
        scanned_at=int(d["scanned_at"]),
        findings=tuple(
            Finding(
                ScanRule(f["rule"]),
                f["function"],
                f["key_or_source"],
                FindingSeverity(f["severity"]),
            )
            for f in d.get("findings", [])
        ),
    )


def alert_to_dict(alert: Alert) -> dict[str, Any]:
    return {
        "alert_id": alert.alert_id,
        "raised_at": alert.raised_at,
        "rule": alert.rule,
        "threat_codes": [c.value for c in alert.threat_codes],
        "severity": alert.severity.value,
        "summary": alert.summary,
        "evidence": [
            {
                "kind": e.kind.value,
                "ref": e.ref,
                "window": list(e.window) if e.window else None,
            }
            for e in alert.evidence
        ],
    }


def alert_from_dict(d: dict[str, Any]) -> Alert:
    return Alert(
        alert_id=d["alert_id"],
        raised_at=int(d["raised_at"]),
        rule=d["rule"],
        threat_codes=tuple(ThreatCode(c) for c in d["threat_codes"]),
        severity=Severity(d["severity"]),
        summary=d["summary"],
        evidence=tuple(
            Evidence(
                EvidenceKind(e["kind"]),
                e["ref"],
                tuple(e["window"]) if e.get("window") else None,
            )
            for e in d["evidence"]
        ),
    )


ENCODERS: dict[str, Callable[[Any], dict[str, Any]]] = {
    BLOCKS: block_to_dict,
    METRICS: metric_to_dict,
    LOGS: log_to_dict,
    CHAINCODES: chaincode_to_dict,
    ISSUES: issue_to_dict,
    SCANS: scan_to_dict,
    ALERTS: alert_to_dict,
}

DECODERS: dict[str, Callable[[dict[str, Any]], Any]] = {
    BLOCKS: block_from_dict,
    METRICS: metric_from_dict,
    LOGS: log_from_dict,
    CHAINCODES: chaincode_from_dict,
    ISSUES: issue_from_dict,
    SCANS: scan_from_dict,
    ALERTS: alert_from_dict,
}


def encode_line(stream: str, event: Any) -> str:
    return dumps(ENCODERS[stream](event))


def decode_line(stream: str, line: str) -> Any:
    return DECODERS[stream](json.loads(line))
