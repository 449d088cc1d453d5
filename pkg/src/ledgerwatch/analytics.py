"""Read-side aggregation: time bucketing, per-MSP rollups, latency resampling,
gossip-link baselines and deviation scoring, and the network graph assembly.

Pure computations over store snapshots; every half-open [from, to) range is
bucketed on epoch-aligned boundaries so bucket identity is stable across
queries.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .model import LATENCY_SERIES, MetricSeries, MspId, NodeKind, Transaction
from .simulator import NetworkDescriptor
from .store import InvalidRangeError, Store, link_key

MINUTE_MS = 60_000
HOUR_MS = 3_600_000

# Gossip deviation compares the last hour against the mean hourly traffic of
# the preceding seven days (168 one-hour windows when history allows).
BASELINE_WINDOW_HOURS = 168
# Below this much history before the current hour, deviation reads 0.
COLD_START_MIN_HISTORY_MS = 30 * MINUTE_MS


class Granularity(Enum):
    MIN_1 = MINUTE_MS
    HOUR_1 = HOUR_MS
    HOUR_12 = 12 * HOUR_MS
    HOUR_24 = 24 * HOUR_MS

    @property
    def width_ms(self) -> int:
        return self.value

    @property
    def token(self) -> str:
        return _TOKENS[self]

    @classmethod
    def from_token(cls, token: str) -> "Granularity":
        for g, t in _TOKENS.items():
            if t == token:
                return g
        raise ValueError(f"unknown granularity {token!r}; use one of "
                         + ", ".join(_TOKENS.values()))


_TOKENS = {
    Granularity.MIN_1: "1m",
    Granularity.HOUR_1: "1h",
    Granularity.HOUR_12: "12h",
    Granularity.HOUR_24: "24h",
}


def align_down(ts: int, g: Granularity) -> int:
    return ts - ts % g.width_ms


@dataclass
class TxBucket:
    bucket_start: int
    counts_by_msp: dict[MspId, int] = field(default_factory=dict)
    total: int = 0
    avg_size_by_msp: dict[MspId, float] = field(default_factory=dict)


def bucket_transactions(
    txs: list[Transaction], g: Granularity, from_ms: int, to_ms: int
) -> list[TxBucket]:
    """One bucket per aligned window intersecting [from, to); empty buckets
    are included with total 0. Transactions outside the range are ignored."""
    if from_ms > to_ms:
        raise InvalidRangeError(f"from {from_ms} > to {to_ms}")
    start = align_down(from_ms, g)
    width = g.width_ms
    if to_ms <= start:
        return []
    n_buckets = (to_ms - 1 - start) // width + 1
    buckets = [TxBucket(start + i * width) for i in range(n_buckets)]
    size_sums: list[dict[MspId, int]] = [dict() for _ in range(n_buckets)]
    for tx in txs:
        if not from_ms <= tx.timestamp < to_ms:
            continue
        b = buckets[(tx.timestamp - start) // width]
        b.total += 1
        b.counts_by_msp[tx.creator_msp] = b.counts_by_msp.get(tx.creator_msp, 0) + 1
        sums = size_sums[(tx.timestamp - start) // width]
        sums[tx.creator_msp] = sums.get(tx.creator_msp, 0) + tx.size_bytes
    for b, sums in zip(buckets, size_sums):
        for msp, total_size in sums.items():
            b.avg_size_by_msp[msp] = total_size / b.counts_by_msp[msp]
    return buckets


def deviation_score(current: float, baseline: float) -> float:
    """Bounded traffic deviation in [-1, 1]: (c - b) / (c + b), 0 at 0/0."""
    if current == 0 and baseline == 0:
        return 0.0
    return (current - baseline) / (current + baseline)


@dataclass(frozen=True)
class LinkStats:
    source: str
    target: str
    current: float   # messages over the last hour
    baseline: float  # mean hourly messages over up to the previous 7 days
    deviation: float


def link_stats(store: Store, link: tuple[str, str], now: int) -> LinkStats:
    """Current-hour traffic vs trailing-week hourly baseline for one link.

    Both directions of the pair count toward the link's traffic. With less
    than 30 minutes of gossip history before the current hour the link is in
    cold start: baseline echoes current and deviation is 0. The baseline mean
    is normalized by the hours actually covered (capped at 168) so short
    histories do not degenerate the score.
    """
    a, b = link_key(*link)
    hour_ago = now - HOUR_MS
    current = store.link_traffic(a, b, hour_ago, now)
    earliest = store.earliest_gossip_ts()
    if earliest is None or hour_ago - earliest < COLD_START_MIN_HISTORY_MS:
        return LinkStats(a, b, current, current, 0.0)
    window_start = max(earliest, now - (BASELINE_WINDOW_HOURS + 1) * HOUR_MS)
    hours = (hour_ago - window_start) / HOUR_MS
    baseline = store.link_traffic(a, b, window_start, hour_ago) / hours
    return LinkStats(a, b, current, baseline, deviation_score(current, baseline))


@dataclass
class LatencyBucket:
    bucket_start: int
    # None marks an empty bucket: a gap, never a zero latency.
    endorsement_duration: float | None = None
    ordering_latency: float | None = None
    validation_duration: float | None = None

    def mean_of(self, series: MetricSeries) -> float | None:
        return getattr(self, _LATENCY_FIELDS[series])

    def total_seconds(self) -> float | None:
        """Sum of the three means, or None when any series has no samples."""
        values = (self.endorsement_duration, self.ordering_latency, self.validation_duration)
        if any(v is None for v in values):
            return None
        return sum(values)  # type: ignore[arg-type]


_LATENCY_FIELDS = {
    MetricSeries.ENDORSEMENT_DURATION: "endorsement_duration",
    MetricSeries.ORDERING_LATENCY: "ordering_latency",
    MetricSeries.VALIDATION_DURATION: "validation_duration",
}


def latency_series(
    store: Store, from_ms: int, to_ms: int, g: Granularity
) -> list[LatencyBucket]:
    """Per-bucket arithmetic means of the three processing-latency series."""
    if from_ms > to_ms:
        raise InvalidRangeError(f"from {from_ms} > to {to_ms}")
    start = align_down(from_ms, g)
    width = g.width_ms
    if to_ms <= start:
        return []
    n_buckets = (to_ms - 1 - start) // width + 1
    buckets = [LatencyBucket(start + i * width) for i in range(n_buckets)]
    for series in LATENCY_SERIES:
        sums = [0.0] * n_buckets
        counts = [0] * n_buckets
        for sample in store.query_metrics(series, max(from_ms, start), to_ms):
            i = (sample.timestamp - start) // width
            sums[i] += sample.value
            counts[i] += 1
        attr = _LATENCY_FIELDS[series]
        for i, bucket in enumerate(buckets):
            if counts[i]:
                setattr(bucket, attr, sums[i] / counts[i])
    return buckets


@dataclass(frozen=True)
class GraphNode:
    id: str
    msp: str
    kind: NodeKind
    local: bool
    border: bool = False


@dataclass(frozen=True)
class GraphLink:
    source: str
    target: str
    current: float | None
    baseline: float | None
    deviation: float


@dataclass
class NetworkGraph:
    generated_at: int
    nodes: list[GraphNode]
    links: list[GraphLink]


BORDER_PEER_ID = "border-peer"
BORDER_ORDERER_ID = "border-orderer"


def build_network_graph(store: Store, net: NetworkDescriptor, now: int) -> NetworkGraph:
    """Assemble the monitoring-visibility graph.

    Local peers and orderers carry measured link stats; every foreign node is
    attached to the artificial border node of its kind with zero deviation and
    no traffic figures, marking where monitoring visibility ends.
    """
    nodes: list[GraphNode] = [
        GraphNode(n.id, n.msp, n.kind, n.local) for n in net.nodes()
    ]
    nodes.append(GraphNode(BORDER_PEER_ID, "", NodeKind.PEER, False, border=True))
    nodes.append(GraphNode(BORDER_ORDERER_ID, "", NodeKind.ORDERER, False, border=True))

    local_ids = {n.id for n in net.local_nodes()}
    links: list[GraphLink] = []
    for a, b in store.gossip_links():
        if a in local_ids and b in local_ids:
            stats = link_stats(store, (a, b), now)
            links.append(GraphLink(a, b, stats.current, stats.baseline, stats.deviation))
    for node in net.foreign_nodes():
        border = BORDER_PEER_ID if node.kind is NodeKind.PEER else BORDER_ORDERER_ID
        links.append(GraphLink(node.id, border, None, None, 0.0))
    return NetworkGraph(now, nodes, links)
