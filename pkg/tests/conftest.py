"""Shared fixtures: canned traces at session scope (simulation is pure, so
sharing is safe) and store builders."""

from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))  # for `oracles`

from ledgerwatch import ingest
from ledgerwatch.simulator import (
    ScenarioKind,
    ScenarioSpec,
    default_network,
    simulate,
    write_trace,
)
from ledgerwatch.store import Store

MIN = 60_000
HOUR = 3_600_000


@pytest.fixture(scope="session")
def baseline_trace():
    return simulate(default_network(2, 2, seed=42), [], length_ms=30 * MIN, baseline_tps=1.0)


@pytest.fixture(scope="session")
def ac1_trace():
    return simulate(
        default_network(2, 2, seed=7),
        [ScenarioSpec(ScenarioKind.AC1_CONFIG_CHANGE, 15 * MIN, 0)],
        length_ms=30 * MIN,
        baseline_tps=1.0,
    )


@pytest.fixture(scope="session")
def sc2_trace():
    return simulate(
        default_network(2, 2, seed=11),
        [ScenarioSpec(ScenarioKind.SC2_VULN_CHAINCODE, 10 * MIN, 10 * MIN)],
        length_ms=30 * MIN,
        baseline_tps=1.0,
    )


@pytest.fixture(scope="session")
def dos_trace():
    # 45 min attack tail after 45 min of clean history, 2h total.
    return simulate(
        default_network(2, 2, seed=5),
        [ScenarioSpec(ScenarioKind.N2_LINK_DOS, 45 * MIN, 75 * MIN, 10.0)],
        length_ms=2 * HOUR,
        baseline_tps=1.0,
    )


@pytest.fixture()
def trace_dir(tmp_path):
    def write(trace, name="trace"):
        out = tmp_path / name
        write_trace(trace, out)
        return out

    return write


def store_from_dir(data_dir) -> Store:
    store = Store(None)
    ingest.load_trace_directory(store, data_dir)
    return store


@pytest.fixture()
def loaded_store(trace_dir):
    def load(trace) -> Store:
        return store_from_dir(trace_dir(trace))

    return load
