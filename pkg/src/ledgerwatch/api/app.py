"""FastAPI application wrapping the monitoring core.

Every response is derived from store queries alone, so restarting the
service over the same data directory reproduces identical bodies; the one
clock-dependent surface is the detection loop, which stamps nothing into
responses. Alerts are pushed to subscribers as a server-sent event stream,
exactly once per connection from subscription time.
"""

from __future__ import annotations

import asyncio
import base64
import binascii
import threading
import time
from contextlib import asynccontextmanager

from fastapi import FastAPI, HTTPException, Query, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, StreamingResponse
from fastapi.staticfiles import StaticFiles

from .. import serde
from ..analytics import (
    Granularity,
    build_network_graph,
    bucket_transactions,
    latency_series,
)
from ..detect import DetectionEngine, RuleConfig
from ..ingest import IngestPipeline, directory_sources, filter_issue_feed
from ..model import LogLevel, TxType
from ..simulator import NetworkDescriptor, load_descriptor
from ..store import InvalidRangeError, Store
from .config import ApiConfig
from .schemas import (
    AlertOut,
    ChaincodeOut,
    IssueOut,
    LogsResponse,
    NetworkResponse,
    ScanReportOut,
    ScanSummaryOut,
    StatusResponse,
    TransactionsResponse,
)

MAX_PAGE_SIZE = 1000
SSE_POLL_S = 0.2
SSE_HEARTBEAT_S = 15.0


class MonitorService:
    """Store + ingestion tailers + the detection loop, one process."""

    def __init__(self, config: ApiConfig):
        self.config = config
        self.data_dir = config.validate_data_dir()
        self.store = Store(self.data_dir)
        rules = (RuleConfig.from_file(config.rules_file)
                 if config.rules_file else RuleConfig())
        self.engine = DetectionEngine(self.store, rules)
        self.pipeline = IngestPipeline(
            self.store, directory_sources(self.data_dir, config.ingest_poll_ms))
        self.descriptor: NetworkDescriptor | None = load_descriptor(self.data_dir)
        self.ready = False
        self._stop = threading.Event()
        self._loop_thread: threading.Thread | None = None

    def start(self) -> None:
        self.pipeline.poll_all()  # synchronous catch-up before serving
        self.pipeline.start()
        self._stop.clear()
        self._loop_thread = threading.Thread(
            target=self._detection_loop, name="detection-loop", daemon=True)
        self._loop_thread.start()
        self.ready = True

    def _detection_loop(self) -> None:
        cadence_s = self.config.evaluation_cadence_ms / 1000.0
        while not self._stop.is_set():
            try:
                self.engine.evaluate(int(time.time() * 1000))
            except Exception:  # detection must never kill the service
                import traceback

                traceback.print_exc()
            self._stop.wait(cadence_s)

    def stop(self) -> None:
        self.ready = False
        self._stop.set()
        if self._loop_thread:
            self._loop_thread.join(timeout=5.0)
        self.pipeline.stop()
        self.store.close()


def _page_cursor(offset: int) -> str:
    return base64.urlsafe_b64encode(f"o:{offset}".encode()).decode()


def _parse_cursor(token: str) -> int:
    try:
        decoded = base64.urlsafe_b64decode(token.encode()).decode()
        tag, _, value = decoded.partition(":")
        if tag != "o":
            raise ValueError
        return int(value)
    except (ValueError, binascii.Error) as exc:
        raise HTTPException(status_code=400, detail="malformed cursor") from exc


def _parse_int(name: str, value: str) -> int:
    try:
        return int(value)
    except ValueError as exc:
        raise HTTPException(status_code=400, detail=f"malformed {name}") from exc


def create_app(config: ApiConfig, service: MonitorService | None = None) -> FastAPI:
    own_service = service is None
    if service is None:
        service = MonitorService(config)

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        if own_service:
            service.start()
        yield
        if own_service:
            service.stop()

    app = FastAPI(title="ledgerwatch", version="1.0", lifespan=lifespan)
    app.state.service = service
    store = service.store

    app.add_middleware(
        CORSMiddleware,
        allow_origins=config.cors_origins,
        allow_methods=["GET"],
        allow_headers=["*"],
    )

    @app.exception_handler(RequestValidationError)
    async def _validation_handler(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"detail": exc.errors()})

    @app.exception_handler(InvalidRangeError)
    async def _range_handler(request: Request, exc: InvalidRangeError):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    def require_ready() -> None:
        if not service.ready:
            raise HTTPException(status_code=503, detail="store not loaded yet")

    @app.get("/api/v1/status", response_model=StatusResponse)
    def status():
        require_ready()
        descriptor = service.descriptor
        if descriptor is not None:
            node_count = len(descriptor.nodes())
            msp_count = len(descriptor.msps)
        else:
            nodes = store.gossip_nodes()
            node_count = len(nodes)
            msp_count = len({tx.creator_msp for tx in store.query_transactions(0, 1 << 62)})
        return StatusResponse(
            height=store.height(),
            last_block_time=store.last_block_time(),
            node_count=node_count,
            msp_count=msp_count,
            alert_counts=store.alert_counts_by_severity(),
        )

    @app.get("/api/v1/issues", response_model=list[IssueOut])
    def issues():
        require_ready()
        return [IssueOut(**serde.issue_to_dict(i)) for i in filter_issue_feed(store.issues())]

    @app.get("/api/v1/alerts", response_model=list[AlertOut])
    def alerts(since: str = "0"):
        require_ready()
        since_ms = _parse_int("since", since)
        return [AlertOut(**serde.alert_to_dict(a)) for a in store.alerts_since(since_ms)]

    @app.get("/api/v1/alerts/stream")
    async def alert_stream(request: Request):
        require_ready()

        async def gen():
            cursor = store.alert_count()  # deliver alerts raised from now on
            last_beat = time.monotonic()
            yield ": subscribed\n\n"
            while True:
                if await request.is_disconnected():
                    return
                count = store.alert_count()
                while cursor < count:
                    alert = store.alert_at(cursor)
                    cursor += 1
                    yield f"data: {serde.encode_line(serde.ALERTS, alert)}\n\n"
                    last_beat = time.monotonic()
                if time.monotonic() - last_beat > SSE_HEARTBEAT_S:
                    yield ": keep-alive\n\n"
                    last_beat = time.monotonic()
                await asyncio.sleep(SSE_POLL_S)

        return StreamingResponse(gen(), media_type="text/event-stream")

    @app.get("/api/v1/network", response_model=NetworkResponse)
    def network(at: str | None = None):
        require_ready()
        if service.descriptor is None:
            raise HTTPException(status_code=503, detail="no network descriptor loaded")
        # Default evaluation instant is data-derived so responses are
        # reproducible across restarts over the same directory.
        now = _parse_int("at", at) if at is not None else (store.latest_event_ts() or 0)
        graph = build_network_graph(store, service.descriptor, now)
        return NetworkResponse(
            generated_at=graph.generated_at,
            nodes=[
                {"id": n.id, "msp": n.msp, "kind": n.kind.value,
                 "local": n.local, "border": n.border}
                for n in graph.nodes
            ],
            links=[
                {"source": l.source, "target": l.target, "current": l.current,
                 "baseline": l.baseline, "deviation": l.deviation}
                for l in graph.links
            ],
        )

    @app.get("/api/v1/logs", response_model=LogsResponse)
    def logs(
        node: str | None = None,
        level: str = "DEBUG",
        from_: str = Query("0", alias="from"),
        to: str = str(1 << 62),
        limit: int = 100,
    ):
        require_ready()
        try:
            level_min = LogLevel(level.upper())
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=f"unknown level {level!r}") from exc
        lines = store.query_logs(
            node=node,
            level_min=level_min,
            from_ms=_parse_int("from", from_),
            to_ms=_parse_int("to", to),
            limit=limit,
        )
        return LogsResponse(lines=[serde.log_to_dict(l) for l in lines])

    @app.get("/api/v1/transactions", response_model=TransactionsResponse)
    def transactions(
        from_: str = Query(alias="from"),
        to: str = Query(),
        granularity: str = "1h",
        chaincode: str | None = None,
        msp: str | None = None,
        tx_type: str | None = None,
        cursor: str | None = None,
        page_size: int = MAX_PAGE_SIZE,
    ):
        require_ready()
        from_ms = _parse_int("from", from_)
        to_ms = _parse_int("to", to)
        try:
            g = Granularity.from_token(granularity)
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        type_filter = None
        if tx_type is not None:
            try:
                type_filter = TxType(tx_type.upper())
            except ValueError as exc:
                raise HTTPException(status_code=400, detail=f"unknown tx_type {tx_type!r}") from exc
        if not 1 <= page_size <= MAX_PAGE_SIZE:
            raise HTTPException(status_code=400, detail=f"page_size must be 1..{MAX_PAGE_SIZE}")

        rows = store.query_transactions(
            from_ms, to_ms, chaincode=chaincode, msp=msp, tx_type=type_filter)
        buckets = bucket_transactions(rows, g, from_ms, to_ms)
        latency = latency_series(store, from_ms, to_ms, g)
        offset = _parse_cursor(cursor) if cursor else 0
        page = rows[offset:offset + page_size]
        next_cursor = (
            _page_cursor(offset + page_size) if offset + page_size < len(rows) else None
        )
        return TransactionsResponse(
            from_ms=from_ms,
            to_ms=to_ms,
            granularity=g.token,
            buckets=[
                {"bucket_start": b.bucket_start, "total": b.total,
                 "counts_by_msp": b.counts_by_msp, "avg_size_by_msp": b.avg_size_by_msp}
                for b in buckets
            ],
            latency=[
                {"bucket_start": b.bucket_start,
                 "endorsement_duration": b.endorsement_duration,
                 "ordering_latency": b.ordering_latency,
                 "validation_duration": b.validation_duration}
                for b in latency
            ],
            rows=[serde.tx_to_dict(tx) for tx in page],
            row_total=len(rows),
            next_cursor=next_cursor,
        )

    def _scan_summary(name: str) -> ScanSummaryOut | None:
        report = store.latest_scan_report(name)
        if report is None:
            return None
        order = ["LOW", "MEDIUM", "HIGH"]
        max_sev = max(
            (f.severity.value for f in report.findings), key=order.index, default=None)
        return ScanSummaryOut(
            report_id=report.report_id,
            scanned_at=report.scanned_at,
            finding_count=len(report.findings),
            max_severity=max_sev,
        )

    @app.get("/api/v1/chaincodes", response_model=list[ChaincodeOut])
    def chaincodes():
        require_ready()
        return [
            ChaincodeOut(name=name, latest=_scan_summary(name))
            for name in store.chaincode_names()
        ]

    @app.get("/api/v1/chaincodes/{name}/scans", response_model=list[ScanReportOut])
    def chaincode_scans(name: str):
        require_ready()
        if name not in store.chaincode_names():
            raise HTTPException(status_code=404, detail=f"unknown chaincode {name!r}")
        return [ScanReportOut(**serde.scan_to_dict(r)) for r in store.scan_reports(name)]

    if config.ui_dir:
        app.mount("/", StaticFiles(directory=config.ui_dir, html=True), name="ui")

    return app
