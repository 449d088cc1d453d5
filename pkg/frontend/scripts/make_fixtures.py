#!/usr/bin/env python3
"""Regenerate frontend test fixtures from the monitoring service itself.

Run from the repo root with the Python package installed:

    python3 frontend/scripts/make_fixtures.py

Writes JSON payloads captured from the real /api/v1 endpoints over canned
attack traces into frontend/tests/fixtures/.
"""

import json
import tempfile
from pathlib import Path

from fastapi.testclient import TestClient

from ledgerwatch.api import load_config
from ledgerwatch.api.app import MonitorService, create_app
from ledgerwatch.simulator import (
    ScenarioKind,
    ScenarioSpec,
    default_network,
    simulate,
    write_trace,
)

MIN = 60_000
OUT = Path(__file__).parent.parent / "tests" / "fixtures"


def client_for(trace, tmp):
    d = Path(tmp) / "trace"
    write_trace(trace, d)
    cfg = load_config(data_dir=str(d), env={})
    service = MonitorService(cfg)
    service.pipeline.poll_all()
    service.ready = True
    service.engine.evaluate(service.store.latest_event_ts() + 2 * MIN)
    return TestClient(create_app(cfg, service))


def dump(name, payload):
    OUT.mkdir(parents=True, exist_ok=True)
    (OUT / name).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n",
                            encoding="utf-8")
    print(f"wrote {name}")


def main():
    # Dashboard payloads from a config-change trace.
    ac1 = simulate(default_network(2, 2, seed=7),
                   [ScenarioSpec(ScenarioKind.AC1_CONFIG_CHANGE, 15 * MIN, 0)],
                   30 * MIN, 1.0)
    with tempfile.TemporaryDirectory() as tmp:
        client = client_for(ac1, tmp)
        dump("status.json", client.get("/api/v1/status").json())
        dump("issues.json", client.get("/api/v1/issues").json())
        dump("alerts.json", client.get("/api/v1/alerts", params={"since": 0}).json())

    # Network payload at the attack peak of a link-DoS trace.
    dos = simulate(default_network(2, 2, seed=5),
                   [ScenarioSpec(ScenarioKind.N2_LINK_DOS, 45 * MIN, 75 * MIN, 10.0)],
                   120 * MIN, 1.0)
    with tempfile.TemporaryDirectory() as tmp:
        client = client_for(dos, tmp)
        peak = dos.windows[0].start_ms + 60 * MIN
        dump("network_dos.json",
             client.get("/api/v1/network", params={"at": peak}).json())

    # Transaction payloads from a flood trace: full range and the brushed
    # attack window.
    flood = simulate(default_network(2, 2, seed=23),
                     [ScenarioSpec(ScenarioKind.N2_TX_FLOOD, 60 * MIN, 10 * MIN, 50.0)],
                     120 * MIN, 1.0)
    with tempfile.TemporaryDirectory() as tmp:
        client = client_for(flood, tmp)
        w = flood.windows[0]
        dump("transactions_full.json", client.get("/api/v1/transactions", params={
            "from": flood.start_ms, "to": flood.end_ms, "granularity": "1m",
            "page_size": 50}).json())
        dump("transactions_flood_window.json", client.get("/api/v1/transactions", params={
            "from": w.start_ms - 5 * MIN, "to": w.end_ms + 5 * MIN, "granularity": "1m",
            "page_size": 50}).json())

    # Chaincode payloads from the vulnerable-chaincode trace.
    sc2 = simulate(default_network(2, 2, seed=11),
                   [ScenarioSpec(ScenarioKind.SC2_VULN_CHAINCODE, 10 * MIN, 10 * MIN)],
                   30 * MIN, 1.0)
    with tempfile.TemporaryDirectory() as tmp:
        client = client_for(sc2, tmp)
        dump("chaincodes_sc2.json", client.get("/api/v1/chaincodes").json())
        dump("scans_vulncc.json", client.get("/api/v1/chaincodes/vulncc/scans").json())


if __name__ == "__main__":
    main()
