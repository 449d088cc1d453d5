"""Security monitoring stack for permissioned ledger networks.

Subpackages cover the full pipeline: trace simulation, ingestion,
an append-only store with queryable indexes, aggregation analytics,
a detection rule engine, and an HTTP API that serves the dashboard.
"""

__version__ = "0.1.0"
