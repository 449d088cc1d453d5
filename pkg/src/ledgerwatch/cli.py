"""Operator entry point: simulate traces, serve the API, scan chaincodes,
replay detection offline.

Exit codes: 0 success, 1 runtime/write failure, 2 invalid arguments or
unparseable input, 3 (scan only) a HIGH finding was detected, for CI gating.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from pathlib import Path

from . import serde
from .analytics import Granularity, align_down
from .api import load_config
from .detect import RuleConfig, evaluate_all, scan_chaincode
from .ingest import IngestPipeline, directory_sources
from .model import FindingSeverity
from .simulator import (
    DEFAULT_START_MS,
    InvalidScenarioError,
    ScenarioKind,
    ScenarioSpec,
    default_network,
    simulate,
    write_trace,
)
from .store import Store

MINUTE_MS = 60_000

# Per-kind defaults: window placement as fractions of the trace and the
# magnitudes the evaluation scenarios use.
_SCENARIO_DEFAULTS: dict[ScenarioKind, tuple[float, float | None, float]] = {
    # kind: (start fraction, duration fraction or None for "to end", magnitude)
    ScenarioKind.SC2_VULN_CHAINCODE: (0.25, None, 1.0),
    ScenarioKind.N2_TX_FLOOD: (0.50, None, 50.0),
    ScenarioKind.N2_TX_SIZE: (0.50, None, 100.0),
    ScenarioKind.N2_LINK_DOS: (0.375, -1.0, 10.0),  # -1: run to trace end
    ScenarioKind.AC1_CONFIG_CHANGE: (0.50, 0.0, 1.0),
}
_DEFAULT_ATTACK_MS = 10 * MINUTE_MS

_DURATION_RE = re.compile(r"^(\d+)(ms|s|m|h|d)?$")
_DURATION_UNITS = {"ms": 1, "s": 1000, "m": 60_000, "h": 3_600_000, "d": 86_400_000}


def parse_duration_ms(text: str) -> int:
    match = _DURATION_RE.match(text.strip())
    if not match:
        raise ValueError(f"bad duration {text!r} (use e.g. 90s, 30m, 2h)")
    value, unit = match.groups()
    return int(value) * _DURATION_UNITS[unit or "s"]


def _parse_scenarios(spec: str, length_ms: int,
                     attack_start: int | None, attack_duration: int | None) -> list[ScenarioSpec]:
    out: list[ScenarioSpec] = []
    for item in spec.split(","):
        item = item.strip()
        if not item:
            continue
        name, _, mag_text = item.partition(":")
        try:
            kind = ScenarioKind(name.upper())
        except ValueError:
            choices = ", ".join(k.value.lower() for k in ScenarioKind)
            raise ValueError(f"unknown scenario {name!r}; choose from: {choices}")
        if kind is ScenarioKind.BASELINE:
            continue
        start_frac, dur_frac, default_mag = _SCENARIO_DEFAULTS[kind]
        start = attack_start if attack_start is not None else int(length_ms * start_frac)
        if attack_duration is not None:
            duration = attack_duration
        elif dur_frac == 0.0:
            duration = 0
        elif dur_frac == -1.0:
            duration = length_ms - start
        else:
            duration = min(_DEFAULT_ATTACK_MS, length_ms - start)
        magnitude = float(mag_text) if mag_text else default_mag
        out.append(ScenarioSpec(kind, start, duration, magnitude))
    return out


def cmd_simulate(args) -> int:
    try:
        length_ms = parse_duration_ms(args.duration)
        if length_ms <= 0:
            raise ValueError("duration must be positive")
        if args.tps <= 0:
            raise ValueError("tps must be positive")
        attack_start = parse_duration_ms(args.attack_start) if args.attack_start else None
        attack_duration = (
            parse_duration_ms(args.attack_duration) if args.attack_duration else None)
        scenarios = _parse_scenarios(args.scenario, length_ms, attack_start, attack_duration)
        net = default_network(args.msps, args.peers_per_msp, seed=args.seed)
        trace = simulate(net, scenarios, length_ms, args.tps, start_ms=args.start_ms)
    except (ValueError, InvalidScenarioError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        write_trace(trace, args.out)
    except OSError as exc:
        print(f"error: cannot write trace: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {args.out}: blocks={len(trace.blocks)} "
          f"transactions={len(trace.transactions())} "
          f"metric_samples={len(trace.metrics)} log_lines={len(trace.logs)} "
          f"chaincodes={len(trace.chaincodes)} issues={len(trace.issues)}")
    for w in trace.windows:
        offset = w.start_ms - trace.start_ms
        print(f"scenario {w.kind.value.lower()}: offset {offset // 1000}s "
              f"window [{w.start_ms}, {w.end_ms}) magnitude {w.magnitude:g}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .api.app import MonitorService, create_app

    try:
        config = load_config(
            args.config,
            listen_address=args.listen,
            data_dir=args.data,
            rules_file=args.rules,
            ui_dir=args.ui,
            evaluation_cadence_ms=(
                parse_duration_ms(args.cadence) if args.cadence else None),
        )
        config.validate_data_dir()
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    try:
        service = MonitorService(config)
        app = create_app(config, service)
        service.start()
        try:
            uvicorn.run(app, host=config.host, port=config.port, log_level="warning")
        finally:
            service.stop()
    except (OSError, SystemExit) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


def cmd_scan(args) -> int:
    path = Path(args.chaincode)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    reports = []
    for line_no, line in enumerate(lines, 1):
        line = line.strip()
        if not line:
            continue
        try:
            cc = serde.decode_line(serde.CHAINCODES, line)
        except Exception as exc:
            print(f"error: {path}:{line_no}: {exc}", file=sys.stderr)
            return 2
        reports.append(scan_chaincode(cc))
    for report in reports:
        print(serde.encode_line(serde.SCANS, report))
    any_high = any(
        f.severity is FindingSeverity.HIGH for r in reports for f in r.findings)
    return 3 if any_high else 0


def replay_alerts(data_dir: str | Path, rules: RuleConfig) -> list:
    """Offline detection over a full trace; uses trace time, never the clock."""
    store = Store(None)  # in-memory: replay must not touch the trace directory
    pipeline = IngestPipeline(store, directory_sources(data_dir))
    pipeline.poll_all()
    latest = store.latest_event_ts()
    if latest is not None:
        now = align_down(latest, Granularity.MIN_1) + 2 * MINUTE_MS
        evaluate_all(store, rules, now)
    return store.alerts()


def cmd_replay(args) -> int:
    data = Path(args.data)
    if not data.is_dir() or not any(
            (data / name).exists() for name in serde.STREAM_FILES.values()):
        print(f"error: {data} is not a trace directory", file=sys.stderr)
        return 2
    try:
        rules = RuleConfig.from_file(args.rules) if args.rules else RuleConfig()
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    alerts = replay_alerts(data, rules)
    print(json.dumps([serde.alert_to_dict(a) for a in alerts], indent=2, sort_keys=True))
    return 0


def build_parser() -> argparse.ArgumentParser:
    kinds = ", ".join(k.value.lower() for k in ScenarioKind)
    parser = argparse.ArgumentParser(
        prog="ledgerwatch",
        description="Security monitoring for permissioned ledger networks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser(
        "simulate", help="generate a deterministic network trace",
        description=f"Scenario kinds: {kinds}. Append :MAGNITUDE to override "
                    "the per-kind default magnitude (flood 50, size 100, link DoS 10).")
    p_sim.add_argument("--scenario", default="baseline",
                       help="comma-separated scenario kinds, e.g. n2_tx_flood:50,ac1_config_change")
    p_sim.add_argument("--seed", type=int, default=42)
    p_sim.add_argument("--duration", default="1h", help="trace length (e.g. 30m, 2h)")
    p_sim.add_argument("--tps", type=float, default=1.0, help="baseline transactions/second")
    p_sim.add_argument("--msps", type=int, default=2)
    p_sim.add_argument("--peers-per-msp", type=int, default=2)
    p_sim.add_argument("--out", required=True, help="output trace directory")
    p_sim.add_argument("--start-ms", type=int, default=DEFAULT_START_MS,
                       help="trace start, epoch ms (default fixed for reproducibility)")
    p_sim.add_argument("--attack-start", default=None,
                       help="override scenario window start offset (duration syntax)")
    p_sim.add_argument("--attack-duration", default=None,
                       help="override scenario window duration")
    p_sim.set_defaults(func=cmd_simulate)

    p_serve = sub.add_parser("serve", help="run the monitoring service")
    p_serve.add_argument("--data", required=True, help="trace/store directory")
    p_serve.add_argument("--listen", default=None, help="host:port (default 127.0.0.1:8420)")
    p_serve.add_argument("--rules", default=None, help="rule thresholds file (key = value)")
    p_serve.add_argument("--config", default=None, help="JSON service config file")
    p_serve.add_argument("--cadence", default=None,
                         help="detection evaluation cadence (default 60s)")
    p_serve.add_argument("--ui", default=None, help="static dashboard bundle to serve at /")
    p_serve.set_defaults(func=cmd_serve)

    p_scan = sub.add_parser("scan", help="scan chaincode IRs from a .jsonl file")
    p_scan.add_argument("--chaincode", required=True, help="chaincode IR .jsonl file")
    p_scan.set_defaults(func=cmd_scan)

    p_replay = sub.add_parser(
        "replay", help="run detection over a full trace offline and print alerts")
    p_replay.add_argument("--data", required=True, help="trace directory")
    p_replay.add_argument("--rules", default=None, help="rule thresholds file")
    p_replay.set_defaults(func=cmd_replay)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    return args.func(args)


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
