"""Fleet service inventory: ingest Windows service exports and tasklist
transcripts, classify every service against a mutable knowledge base, and
report what is hostile, unknown, or drifting."""

from .classify import (
    Classification,
    KbEntry,
    KnowledgeBase,
    Verdict,
    policy_violations,
    seed_kb,
)
from .errors import IngestError, InvariantViolation, StorageFailure, SvcwatchError
from .ingest import parse_export, parse_tasklist, serialize_export, serialize_tasklist
from .inventory import InventoryStore, attach_processes, diff_snapshots
from .model import (
    ChangeSet,
    HostSnapshot,
    LogonAccount,
    ProcessRecord,
    ServiceRecord,
    StartupType,
    Status,
    canonical_key,
)
from .report import by_system, network_aggregate, application_view, render, triage

__version__ = "0.1.0"

__all__ = [
    "ChangeSet",
    "Classification",
    "HostSnapshot",
    "IngestError",
    "InvariantViolation",
    "InventoryStore",
    "KbEntry",
    "KnowledgeBase",
    "LogonAccount",
    "ProcessRecord",
    "ServiceRecord",
    "StartupType",
    "Status",
    "StorageFailure",
    "SvcwatchError",
    "Verdict",
    "application_view",
    "attach_processes",
    "by_system",
    "canonical_key",
    "diff_snapshots",
    "network_aggregate",
    "parse_export",
    "parse_tasklist",
    "policy_violations",
    "render",
    "seed_kb",
    "serialize_export",
    "serialize_tasklist",
    "triage",
]
