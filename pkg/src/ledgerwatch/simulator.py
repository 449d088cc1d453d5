"""Deterministic generator of a permissioned-ledger network's event streams.

Produces blocks, gossip/latency metrics, logs, chaincode IRs and an issue
feed fixture, with injectable attack scenarios (transaction flood, oversized
transactions, link DoS, config change, vulnerable chaincode with exploit
burst). The whole trace is a pure function of the network descriptor, the
scenario list, the duration, the baseline rate and the seed: independent
random streams per concern keep baseline draws identical whether or not a
scenario is active.
"""

from __future__ import annotations

import hashlib
import math
import random
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path

from . import serde
from .model import (
    Block,
    CcFunction,
    CcOp,
    CcOpKind,
    ChaincodeIR,
    Issue,
    IssuePriority,
    LogLevel,
    LogLine,
    MetricSample,
    MetricSeries,
    MspId,
    NodeKind,
    NodeRef,
    ReadItem,
    Transaction,
    TxType,
    ValidationCode,
    WriteItem,
    gossip_sample,
)

# 2021-03-01T00:00:00Z; a fixed default start keeps reruns byte-identical.
DEFAULT_START_MS = 1_614_556_800_000

SCRAPE_INTERVAL_MS = 15_000
BLOCK_CUT_MS = 2_000          # orderer timer
BLOCK_CUT_TX = 10             # orderer batch size
TX_SIZE_MEDIAN = 3072         # bytes; lognormal, 99th pct stays under 20 KiB
TX_SIZE_SIGMA = 0.5
LATENCY_SIGMA = 0.1
LATENCY_MEDIANS_S = {
    MetricSeries.ENDORSEMENT_DURATION: 0.05,
    MetricSeries.ORDERING_LATENCY: 0.8,
    MetricSeries.VALIDATION_DURATION: 0.15,
}
FLOOD_LOAD_COEF = 0.15        # latency multiplier = 1 + coef * (magnitude - 1)
GOSSIP_PEER_RATE = 40.0       # messages per direction per scrape interval
GOSSIP_ORDERER_RATE = 20.0
EXPLOIT_BURST_TX = 20
VULN_CC_NAME = "vulncc"
COMMIT_MSG_PREFIX = "Committed block "


class InvalidScenarioError(ValueError):
    pass


class ScenarioKind(Enum):
    BASELINE = "BASELINE"
    SC2_VULN_CHAINCODE = "SC2_VULN_CHAINCODE"
    N2_TX_FLOOD = "N2_TX_FLOOD"
    N2_TX_SIZE = "N2_TX_SIZE"
    N2_LINK_DOS = "N2_LINK_DOS"
    AC1_CONFIG_CHANGE = "AC1_CONFIG_CHANGE"


@dataclass(frozen=True)
class ScenarioSpec:
    kind: ScenarioKind
    start_offset_ms: int
    duration_ms: int
    magnitude: float = 1.0  # rate/size/traffic multiplier depending on kind


@dataclass(frozen=True)
class NetworkDescriptor:
    msps: tuple[MspId, ...]
    local_msp: MspId
    peers_per_msp: int
    orderers: tuple[NodeRef, ...]
    seed: int

    def __post_init__(self):
        if len(self.msps) < 2:
            raise ValueError("need at least 2 MSPs")
        if self.local_msp not in self.msps:
            raise ValueError("local_msp must be one of msps")
        if self.peers_per_msp < 1:
            raise ValueError("peers_per_msp must be positive")
        if not self.orderers:
            raise ValueError("need at least one orderer")

    def peers(self) -> list[NodeRef]:
        return [
            NodeRef(f"{msp}-peer{i}", msp, NodeKind.PEER, msp == self.local_msp)
            for msp in self.msps
            for i in range(self.peers_per_msp)
        ]

    def nodes(self) -> list[NodeRef]:
        return self.peers() + list(self.orderers)

    def local_nodes(self) -> list[NodeRef]:
        return [n for n in self.nodes() if n.local]

    def foreign_nodes(self) -> list[NodeRef]:
        return [n for n in self.nodes() if not n.local]


def default_network(msp_count: int = 2, peers_per_msp: int = 2, seed: int = 42) -> NetworkDescriptor:
    """One orderer per MSP, local organization is the first MSP."""
    msps = tuple(f"Org{i + 1}" for i in range(msp_count))
    local = msps[0]
    orderers = tuple(
        NodeRef(f"{msp}-orderer0", msp, NodeKind.ORDERER, msp == local) for msp in msps
    )
    return NetworkDescriptor(msps, local, peers_per_msp, orderers, seed)


@dataclass(frozen=True)
class ScenarioWindow:
    kind: ScenarioKind
    start_ms: int
    end_ms: int
    magnitude: float


@dataclass
class EventTrace:
    net: NetworkDescriptor
    scenarios: tuple[ScenarioSpec, ...]
    start_ms: int
    length_ms: int
    baseline_tps: float
    windows: tuple[ScenarioWindow, ...]
    blocks: list[Block] = field(default_factory=list)
    metrics: list[MetricSample] = field(default_factory=list)
    logs: list[LogLine] = field(default_factory=list)
    chaincodes: list[ChaincodeIR] = field(default_factory=list)
    issues: list[Issue] = field(default_factory=list)

    @property
    def end_ms(self) -> int:
        return self.start_ms + self.length_ms

    def transactions(self) -> list[Transaction]:
        return [tx for b in self.blocks for tx in b.transactions]

    def window(self, kind: ScenarioKind) -> ScenarioWindow | None:
        for w in self.windows:
            if w.kind is kind:
                return w
        return None


# -- chaincode fixtures -----------------------------------------------------

def baseline_chaincodes() -> list[ChaincodeIR]:
    return [
        ChaincodeIR(
            "assetcc",
            (
                CcFunction("create_asset", (CcOp(CcOpKind.READ, "owner"), CcOp(CcOpKind.WRITE, "asset"))),
                CcFunction("transfer", (CcOp(CcOpKind.READ, "asset"), CcOp(CcOpKind.WRITE, "asset"))),
            ),
        ),
        ChaincodeIR(
            "paymentcc",
            (
                CcFunction(
                    "pay",
                    (
                        CcOp(CcOpKind.READ, "balance"),
                        CcOp(CcOpKind.WRITE, "balance"),
                        CcOp(CcOpKind.WRITE, "receipt"),
                    ),
                ),
            ),
        ),
    ]


def vulnerable_chaincode() -> ChaincodeIR:
    # One function writes a key and reads it back in the same invocation.
    return ChaincodeIR(
        VULN_CC_NAME,
        (
            CcFunction(
                "update_balance",
                (CcOp(CcOpKind.WRITE, "balance"), CcOp(CcOpKind.READ, "balance")),
            ),
        ),
    )


# -- internal arrival records -------------------------------------------------

@dataclass
class _Arrival:
    t: int
    order: tuple  # deterministic tie-break
    tx_id: str
    creator: MspId
    chaincode: str
    tx_type: TxType
    size_bytes: int
    read_set: tuple[ReadItem, ...]
    write_set: tuple[WriteItem, ...]
    validation_code: ValidationCode


def _poisson(rng: random.Random, lam: float) -> int:
    # Knuth's method; fine for the modest rates used here.
    threshold = math.exp(-lam)
    k = 0
    p = 1.0
    while True:
        p *= rng.random()
        if p <= threshold:
            return k
        k += 1


def _tx_id(seed: int, stream: str, counter: int) -> str:
    return hashlib.sha256(f"{seed}:{stream}:{counter}".encode()).hexdigest()


def _value_hash(seed: int, stream: str, counter: int) -> str:
    return hashlib.sha256(f"vh:{seed}:{stream}:{counter}".encode()).hexdigest()[:24]


def _in_window(t: int, w: ScenarioWindow) -> bool:
    return w.start_ms <= t < w.end_ms


def attacker_msp(net: NetworkDescriptor) -> MspId:
    """Deterministic foreign organization used as the attack source."""
    for msp in reversed(net.msps):
        if msp != net.local_msp:
            return msp
    return net.msps[-1]


def dos_target_link(net: NetworkDescriptor) -> tuple[str, str]:
    """Deterministic local link the DoS scenario hits: prefer a peer-peer pair."""
    pairs = _local_pairs(net)
    for a, b in pairs:
        if a.kind is NodeKind.PEER and b.kind is NodeKind.PEER:
            return (a.id, b.id)
    a, b = pairs[0]
    return (a.id, b.id)


def _local_pairs(net: NetworkDescriptor) -> list[tuple[NodeRef, NodeRef]]:
    local = sorted(net.local_nodes(), key=lambda n: (n.kind.value, n.id))
    peers = [n for n in local if n.kind is NodeKind.PEER]
    orderers = [n for n in local if n.kind is NodeKind.ORDERER]
    pairs: list[tuple[NodeRef, NodeRef]] = []
    for i in range(len(peers)):
        for j in range(i + 1, len(peers)):
            pairs.append((peers[i], peers[j]))
    for p in peers:
        for o in orderers:
            pairs.append((p, o))
    return pairs


# -- simulation ---------------------------------------------------------------

def _resolve_windows(
    scenarios: tuple[ScenarioSpec, ...], start_ms: int, length_ms: int
) -> tuple[ScenarioWindow, ...]:
    windows = []
    for s in scenarios:
        if s.kind is ScenarioKind.BASELINE:
            continue
        if s.start_offset_ms < 0 or s.duration_ms < 0:
            raise InvalidScenarioError("scenario offsets must be non-negative")
        if s.start_offset_ms + s.duration_ms > length_ms:
            raise InvalidScenarioError(
                f"{s.kind.value}: window exceeds simulation length")
        if s.magnitude < 1.0:
            raise InvalidScenarioError("magnitude must be >= 1")
        windows.append(ScenarioWindow(
            s.kind, start_ms + s.start_offset_ms,
            start_ms + s.start_offset_ms + s.duration_ms, s.magnitude))
    return tuple(windows)


def simulate(
    net: NetworkDescriptor,
    scenarios: list[ScenarioSpec] | tuple[ScenarioSpec, ...] = (),
    length_ms: int = 3_600_000,
    baseline_tps: float = 1.0,
    start_ms: int = DEFAULT_START_MS,
) -> EventTrace:
    """Generate a full event trace; see module docstring for determinism notes."""
    if length_ms <= 0:
        raise InvalidScenarioError("length must be positive")
    if baseline_tps <= 0:
        raise InvalidScenarioError("baseline_tps must be positive")
    scenarios = tuple(scenarios)
    windows = _resolve_windows(scenarios, start_ms, length_ms)
    trace = EventTrace(net, scenarios, start_ms, length_ms, baseline_tps, windows)
    seed = net.seed
    end_ms = trace.end_ms

    ccs = baseline_chaincodes()
    cc_names = [c.name for c in ccs]
    attacker = attacker_msp(net)

    arrivals = _baseline_arrivals(seed, net, cc_names, baseline_tps, start_ms, end_ms)
    for w in windows:
        if w.kind is ScenarioKind.N2_TX_FLOOD:
            arrivals += _flood_arrivals(seed, attacker, cc_names, baseline_tps, w)
    for w in windows:
        if w.kind is ScenarioKind.N2_TX_SIZE:
            for a in arrivals:
                if a.creator == attacker and _in_window(a.t, w):
                    a.size_bytes = int(a.size_bytes * w.magnitude)
    for w in windows:
        if w.kind is ScenarioKind.AC1_CONFIG_CHANGE:
            arrivals.append(_Arrival(
                t=w.start_ms, order=(3, 0),
                tx_id=_tx_id(seed, "config", w.start_ms),
                creator=attacker, chaincode="", tx_type=TxType.CONFIG,
                size_bytes=6144, read_set=(), write_set=(
                    WriteItem("channel/configuration", _value_hash(seed, "config", 0)),),
                validation_code=ValidationCode.VALID))

    arrivals.sort(key=lambda a: (a.t, a.order))
    trace.blocks = _cut_blocks(arrivals)
    trace.chaincodes = list(ccs)
    trace.metrics = _metric_samples(seed, net, windows, start_ms, length_ms)
    trace.logs = _window_logs(seed, net, windows, start_ms, end_ms)
    trace.issues = issue_feed_fixture(start_ms)

    _append_commit_logs(trace)
    if any(w.kind is ScenarioKind.SC2_VULN_CHAINCODE for w in windows):
        trace = inject_sc2(trace)
    return trace


def _baseline_arrivals(
    seed: int,
    net: NetworkDescriptor,
    cc_names: list[str],
    tps: float,
    start_ms: int,
    end_ms: int,
) -> list[_Arrival]:
    rng = random.Random(f"{seed}:arrivals")
    mu = math.log(TX_SIZE_MEDIAN)
    arrivals: list[_Arrival] = []
    t = float(start_ms)
    n = 0
    while True:
        t += rng.expovariate(tps / 1000.0)
        if t >= end_ms:
            break
        cc = rng.choice(cc_names)
        key = f"{cc}:asset{rng.randrange(50)}"
        arrivals.append(_Arrival(
            t=int(t), order=(0, n),
            tx_id=_tx_id(seed, "base", n),
            creator=rng.choice(net.msps),
            chaincode=cc,
            tx_type=TxType.ENDORSER,
            size_bytes=max(64, int(rng.lognormvariate(mu, TX_SIZE_SIGMA))),
            read_set=(ReadItem(key, (0, 0)),),
            write_set=(WriteItem(key, _value_hash(seed, "base", n)),),
            validation_code=ValidationCode.VALID,
        ))
        n += 1
    return arrivals


def _flood_arrivals(
    seed: int,
    attacker: MspId,
    cc_names: list[str],
    baseline_tps: float,
    w: ScenarioWindow,
) -> list[_Arrival]:
    rng = random.Random(f"{seed}:flood:{w.start_ms}")
    rate = baseline_tps * (w.magnitude - 1.0)
    if rate <= 0:
        return []
    mu = math.log(TX_SIZE_MEDIAN)
    arrivals: list[_Arrival] = []
    t = float(w.start_ms)
    n = 0
    while True:
        t += rng.expovariate(rate / 1000.0)
        if t >= w.end_ms:
            break
        cc = rng.choice(cc_names)
        key = f"{cc}:asset{rng.randrange(50)}"
        arrivals.append(_Arrival(
            t=int(t), order=(1, n),
            tx_id=_tx_id(seed, f"flood{w.start_ms}", n),
            creator=attacker,
            chaincode=cc,
            tx_type=TxType.ENDORSER,
            size_bytes=max(64, int(rng.lognormvariate(mu, TX_SIZE_SIGMA))),
            read_set=(ReadItem(key, (0, 0)),),
            write_set=(WriteItem(key, _value_hash(seed, "flood", n)),),
            validation_code=ValidationCode.VALID,
        ))
        n += 1
    return arrivals


def _exploit_arrivals(seed: int, attacker: MspId, w: ScenarioWindow) -> list[_Arrival]:
    rng = random.Random(f"{seed}:sc2")
    span = max(1, w.end_ms - w.start_ms)
    times = sorted(w.start_ms + rng.randrange(span) for _ in range(EXPLOIT_BURST_TX))
    arrivals = []
    for n, t in enumerate(times):
        # Written-then-read key plus sporadic MVCC invalidations: the trace
        # of a read-after-write bug being exploited.
        arrivals.append(_Arrival(
            t=t, order=(2, n),
            tx_id=_tx_id(seed, "exploit", n),
            creator=attacker,
            chaincode=VULN_CC_NAME,
            tx_type=TxType.ENDORSER,
            size_bytes=max(64, int(rng.lognormvariate(math.log(TX_SIZE_MEDIAN), TX_SIZE_SIGMA))),
            read_set=(ReadItem("balance", (0, 0)),),
            write_set=(WriteItem("balance", _value_hash(seed, "exploit", n)),),
            validation_code=(
                ValidationCode.INVALID_MVCC if n % 4 == 3 else ValidationCode.VALID),
        ))
    return arrivals


def _cut_blocks(arrivals: list[_Arrival]) -> list[Block]:
    """Orderer model: cut at BLOCK_CUT_TX transactions or BLOCK_CUT_MS after the
    batch's first arrival, whichever first; config transactions get solo blocks."""
    blocks: list[Block] = []
    prev_hash = "0" * 64
    batch: list[_Arrival] = []
    deadline = 0

    def cut(at: int, items: list[_Arrival]) -> None:
        nonlocal prev_hash
        number = len(blocks)
        txs = tuple(
            Transaction(
                tx_id=a.tx_id, block_num=number, tx_index=i, timestamp=a.t,
                creator_msp=a.creator, chaincode=a.chaincode, tx_type=a.tx_type,
                size_bytes=a.size_bytes, read_set=a.read_set, write_set=a.write_set,
                validation_code=a.validation_code,
            )
            for i, a in enumerate(items)
        )
        data_hash = hashlib.sha256(
            "|".join([str(number), str(at)] + [t.tx_id for t in txs]).encode()
        ).hexdigest()
        blocks.append(Block(number, prev_hash, data_hash, at, len(txs), txs))
        prev_hash = data_hash

    for a in arrivals:
        if batch and a.t >= deadline:
            cut(deadline, batch)
            batch = []
        if a.tx_type is TxType.CONFIG:
            if batch:
                cut(a.t, batch)
                batch = []
            cut(a.t, [a])
            continue
        batch.append(a)
        if len(batch) == 1:
            deadline = a.t + BLOCK_CUT_MS
        if len(batch) >= BLOCK_CUT_TX:
            cut(a.t, batch)
            batch = []
    if batch:
        cut(deadline, batch)
    return blocks


def _blocks_to_arrivals(blocks: list[Block]) -> list[_Arrival]:
    out = []
    for b in blocks:
        for tx in b.transactions:
            out.append(_Arrival(
                t=tx.timestamp, order=(0, b.number, tx.tx_index),
                tx_id=tx.tx_id, creator=tx.creator_msp, chaincode=tx.chaincode,
                tx_type=tx.tx_type, size_bytes=tx.size_bytes,
                read_set=tx.read_set, write_set=tx.write_set,
                validation_code=tx.validation_code,
            ))
    return out


def inject_sc2(trace: EventTrace) -> EventTrace:
    """Splice the vulnerable chaincode and its exploit burst into a trace.

    Requires an SC2 window in the trace; idempotent when the exploit is
    already present. Blocks are re-cut so numbering and hash chaining stay
    valid after the splice.
    """
    w = trace.window(ScenarioKind.SC2_VULN_CHAINCODE)
    if w is None:
        raise InvalidScenarioError("no SC2 window in trace")
    if any(tx.chaincode == VULN_CC_NAME for tx in trace.transactions()):
        return trace

    arrivals = _blocks_to_arrivals(trace.blocks)
    arrivals += _exploit_arrivals(trace.net.seed, attacker_msp(trace.net), w)
    arrivals.sort(key=lambda a: (a.t, a.order))

    out = replace(trace)
    out.blocks = _cut_blocks(arrivals)
    out.chaincodes = list(trace.chaincodes) + [vulnerable_chaincode()]
    out.logs = list(trace.logs)
    out.metrics = list(trace.metrics)
    out.issues = list(trace.issues)
    _append_commit_logs(out)  # block numbering changed; rebuild commit lines
    return out


def _metric_samples(
    seed: int,
    net: NetworkDescriptor,
    windows: tuple[ScenarioWindow, ...],
    start_ms: int,
    length_ms: int,
) -> list[MetricSample]:
    samples: list[MetricSample] = []
    pairs = _local_pairs(net)
    dos_windows = [w for w in windows if w.kind is ScenarioKind.N2_LINK_DOS]
    target = dos_target_link(net) if dos_windows else None
    flood_windows = [w for w in windows if w.kind is ScenarioKind.N2_TX_FLOOD]

    rngs = {}
    for a, b in pairs:
        for src, dst in ((a, b), (b, a)):
            rngs[(src.id, dst.id)] = random.Random(f"{seed}:gossip:{src.id}->{dst.id}")
    lat_rngs = {
        series: random.Random(f"{seed}:latency:{series.value}")
        for series in LATENCY_MEDIANS_S
    }

    steps = length_ms // SCRAPE_INTERVAL_MS
    for k in range(1, steps + 1):
        t = start_ms + k * SCRAPE_INTERVAL_MS
        for a, b in pairs:
            rate = (
                GOSSIP_PEER_RATE
                if a.kind is NodeKind.PEER and b.kind is NodeKind.PEER
                else GOSSIP_ORDERER_RATE
            )
            for src, dst in ((a, b), (b, a)):
                value = float(_poisson(rngs[(src.id, dst.id)], rate))
                if target and {src.id, dst.id} == set(target):
                    for w in dos_windows:
                        if _in_window(t, w):
                            value *= w.magnitude
                samples.append(gossip_sample(t, src.id, dst.id, value))
        load = 1.0
        for w in flood_windows:
            if _in_window(t, w):
                load = max(load, 1.0 + FLOOD_LOAD_COEF * (w.magnitude - 1.0))
        for series, median in LATENCY_MEDIANS_S.items():
            value = lat_rngs[series].lognormvariate(math.log(median), LATENCY_SIGMA) * load
            samples.append(MetricSample(t, series, (), value))
    return samples


def _window_logs(
    seed: int,
    net: NetworkDescriptor,
    windows: tuple[ScenarioWindow, ...],
    start_ms: int,
    end_ms: int,
) -> list[LogLine]:
    rng = random.Random(f"{seed}:logs")
    local_peers = [n for n in net.local_nodes() if n.kind is NodeKind.PEER]
    lines: list[LogLine] = []

    # Sporadic baseline errors, about two per hour.
    t = float(start_ms)
    while True:
        t += rng.expovariate(2.0 / 3_600_000.0)
        if t >= end_ms:
            break
        node = rng.choice(local_peers)
        lines.append(LogLine(int(t), node.id, LogLevel.ERROR,
                             f"Endorsement timeout for proposal {rng.randrange(1 << 20):x}"))

    for w in windows:
        if w.kind is ScenarioKind.N2_TX_FLOOD:
            for t in range(w.start_ms, w.end_ms, 30_000):
                lines.append(LogLine(t, local_peers[0].id, LogLevel.ERROR,
                                     f"Validation queue backlog above {int(w.magnitude * 10)}"))
        elif w.kind is ScenarioKind.N2_LINK_DOS:
            target = dos_target_link(net)
            for t in range(w.start_ms, w.end_ms, 30_000):
                lines.append(LogLine(t, target[0], LogLevel.WARN,
                                     f"Gossip send to {target[1]} delayed"))
    return lines


def _append_commit_logs(trace: EventTrace) -> None:
    """(Re)generate per-block commit lines; idempotent across block re-cuts."""
    trace.logs = [
        l for l in trace.logs
        if not l.message.startswith(COMMIT_MSG_PREFIX)
        and not l.message.startswith("Configuration update committed")
    ]
    local_peers = [n for n in trace.net.local_nodes() if n.kind is NodeKind.PEER]
    for block in trace.blocks:
        node = local_peers[block.number % len(local_peers)]
        trace.logs.append(LogLine(
            block.timestamp, node.id, LogLevel.INFO,
            f"{COMMIT_MSG_PREFIX}{block.number} ({block.tx_count} tx)"))
        if any(tx.tx_type is TxType.CONFIG for tx in block.transactions):
            trace.logs.append(LogLine(
                block.timestamp, node.id, LogLevel.WARN,
                f"Configuration update committed in block {block.number}"))
    trace.logs.sort(key=lambda l: (l.timestamp, l.node, l.message))


_ISSUE_FIXTURE = [
    ("FAB-18425", "Orderer panics on malformed config envelope", IssuePriority.HIGHEST, "Open", 3),
    ("FAB-18390", "Gossip state transfer stalls under high peer churn", IssuePriority.HIGH, "In Progress", 8),
    ("FAB-18377", "Private data purge races with block commit", IssuePriority.HIGH, "Open", 26),
    ("FAB-18311", "Peer CLI mishandles TLS handshake timeout", IssuePriority.MEDIUM, "Open", 49),
    ("FAB-18288", "Chaincode launcher leaks container handles", IssuePriority.MEDIUM, "In Review", 80),
    ("FAB-18264", "Metrics endpoint reports stale channel height", IssuePriority.LOW, "Open", 122),
    ("FAB-18201", "Typo in sample connection profile docs", IssuePriority.LOW, "Open", 190),
    ("FAB-18155", "Flaky unit test in ledger package", IssuePriority.LOWEST, "Open", 301),
]


def issue_feed_fixture(start_ms: int) -> list[Issue]:
    """Static tracker-feed fixture; `updated` offsets are hours before the trace."""
    return [
        Issue(issue_id, title, priority, status, start_ms - hours_ago * 3_600_000,
              f"{title}. See tracker for details.")
        for issue_id, title, priority, status, hours_ago in _ISSUE_FIXTURE
    ]


# -- trace directory I/O ------------------------------------------------------

NETWORK_FILE = "network.json"


def write_trace(trace: EventTrace, out_dir: str | Path) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    streams = {
        serde.BLOCKS: trace.blocks,
        serde.METRICS: trace.metrics,
        serde.LOGS: trace.logs,
        serde.CHAINCODES: trace.chaincodes,
        serde.ISSUES: trace.issues,
    }
    for stream, events in streams.items():
        path = out / serde.STREAM_FILES[stream]
        with path.open("w", encoding="utf-8") as fh:
            for event in events:
                fh.write(serde.encode_line(stream, event) + "\n")
    (out / NETWORK_FILE).write_text(descriptor_to_json(trace.net), encoding="utf-8")


def descriptor_to_json(net: NetworkDescriptor) -> str:
    import json

    return json.dumps(
        {
            "msps": list(net.msps),
            "local_msp": net.local_msp,
            "peers_per_msp": net.peers_per_msp,
            "orderers": [
                {"id": o.id, "msp": o.msp, "kind": o.kind.value, "local": o.local}
                for o in net.orderers
            ],
            "seed": net.seed,
        },
        indent=2,
        sort_keys=True,
    )


def load_descriptor(data_dir: str | Path) -> NetworkDescriptor | None:
    import json

    path = Path(data_dir) / NETWORK_FILE
    if not path.exists():
        return None
    d = json.loads(path.read_text(encoding="utf-8"))
    return NetworkDescriptor(
        msps=tuple(d["msps"]),
        local_msp=d["local_msp"],
        peers_per_msp=int(d["peers_per_msp"]),
        orderers=tuple(
            NodeRef(o["id"], o["msp"], NodeKind(o["kind"]), bool(o["local"]))
            for o in d["orderers"]
        ),
        seed=int(d["seed"]),
    )
