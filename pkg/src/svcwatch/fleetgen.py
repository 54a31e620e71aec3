"""Deterministic synthetic-fleet generator for tests and demos.

Given a seed, fabricates host snapshots with plausible service inventories
and multi-instance shared-host process listings, plus a knowledge base that
covers everything except a chosen number of hostile and unknown services.
Same seed, same fleet, byte for byte.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from pathlib import Path
from random import Random

from .classify import SEED_ENTRIES, KbEntry, KnowledgeBase, Verdict, export_kb, seed_kb
from .errors import InvariantViolation
from .ingest import rows_from_records, serialize_export, serialize_tasklist
from .model import (
    LOCAL_SYSTEM,
    NETWORK_SERVICE,
    HostSnapshot,
    ProcessRecord,
    ServiceRecord,
    StartupType,
    Status,
    canonical_key,
    format_ts,
)

# fixed collection instant keeps generator output reproducible byte for byte
BASE_TS = datetime(2026, 1, 1, 0, 0, 0, tzinfo=timezone.utc)

SHARED_HOST_IMAGE = "svchost.exe"
SHARED_HOST_PATH = "C:\\WINDOWS\\System32\\svchost.exe -k netsvcs"

_FIRST = (
    "Asset", "Backup", "Cache", "Directory", "Endpoint", "File", "Gateway",
    "Health", "Index", "Journal", "License", "Metrics", "Patch", "Queue",
    "Replication", "Session", "Telemetry", "Update", "Volume", "Workflow",
)
_SECOND = (
    "Agent", "Broker", "Dispatcher", "Manager", "Monitor", "Relay",
    "Scheduler", "Sync", "Tracker", "Watcher",
)
_VENDORS = (
    "Northbridge Software", "Quill Systems", "Latchkey Labs",
    "Ferrous Computing", "Holloway Tools",
)

# processes every host shows that back no service at all
_BARE_PROCESSES = ("System", "smss.exe", "csrss.exe", "winlogon.exe", "explorer.exe")

# first words whose services belong to a named product suite; the rest are
# standalone tools with no application grouping
_SUITED = frozenset(
    ("Asset", "Backup", "Cache", "Endpoint", "File", "Index", "License",
     "Metrics", "Patch", "Telemetry", "Update")
)


@dataclass(frozen=True)
class _SvcInfo:
    """Fleet-wide fixed traits of one generated service."""

    key: str
    shared_host: bool  # lives inside a shared svchost-style process
    path: str
    manufacturer: str
    description: str
    startup: StartupType
    seeded: bool


def _exe_name(key: str) -> str:
    return "".join(ch for ch in key.lower() if ch.isalnum()) + ".exe"


def _generated_names(rng: Random, count: int) -> list[str]:
    combos = [f"{a} {b}" for a in _FIRST for b in _SECOND]
    if count <= len(combos):
        return rng.sample(combos, count)
    extra = [f"Custom Service {i}" for i in range(count - len(combos))]
    return rng.sample(combos, len(combos)) + extra


def _service_infos(
    rng: Random, generated: list[str], seed_entries
) -> dict[str, _SvcInfo]:
    infos: dict[str, _SvcInfo] = {}
    for name, description, recommended in seed_entries:
        shared = rng.random() < 0.6
        infos[name] = _SvcInfo(
            key=name,
            shared_host=shared,
            path=SHARED_HOST_PATH if shared else f"C:\\WINDOWS\\System32\\{_exe_name(name)}",
            manufacturer="Microsoft Corporation",
            description=description,
            startup=recommended,
            seeded=True,
        )
    for name in generated:
        shared = rng.random() < 0.35
        vendor = rng.choice(_VENDORS)
        infos[name] = _SvcInfo(
            key=name,
            shared_host=shared,
            path=SHARED_HOST_PATH
            if shared
            else f"C:\\Program Files\\{vendor}\\{_exe_name(name)}",
            manufacturer=vendor,
            description=f"{name} background component",
            startup=rng.choice((StartupType.AUTOMATIC, StartupType.MANUAL)),
            seeded=False,
        )
    return infos


def _record(host: str, info: _SvcInfo, status: Status) -> ServiceRecord:
    return ServiceRecord(
        host=host,
        service_key=canonical_key(info.key),
        display_name=info.key,
        description=info.description,
        status=status,
        startup=info.startup,
        logon=NETWORK_SERVICE if info.shared_host and not info.seeded else LOCAL_SYSTEM,
        path=info.path,
        manufacturer=info.manufacturer,
    )


def _processes(
    rng: Random, host_records: dict[str, ServiceRecord], infos: dict[str, _SvcInfo]
) -> tuple[ProcessRecord, ...]:
    """Bare system processes, then shared-host groups, then standalone images."""
    used_pids = {0, 4}

    def fresh_pid() -> int:
        while True:
            pid = rng.randrange(100, 6000, 4)
            if pid not in used_pids:
                used_pids.add(pid)
                return pid

    procs = [ProcessRecord("System Idle Process", 0), ProcessRecord(_BARE_PROCESSES[0], 4)]
    procs += [ProcessRecord(name, fresh_pid()) for name in _BARE_PROCESSES[1:]]

    running = [
        info
        for info in infos.values()
        if info.key in host_records and host_records[info.key].status is Status.RUNNING
    ]
    shared = [info.key for info in running if info.shared_host]
    if shared:
        group_count = min(len(shared), rng.randint(2, 4))
        groups: list[list[str]] = [[] for _ in range(group_count)]
        for key in shared:
            groups[rng.randrange(group_count)].append(key)
        for group in groups:
            if group:
                procs.append(ProcessRecord(SHARED_HOST_IMAGE, fresh_pid(), tuple(group)))
    for info in running:
        if not info.shared_host:
            procs.append(
                ProcessRecord(_exe_name(info.key), fresh_pid(), (info.key,))
            )
    return tuple(procs)


def generate_fleet(
    hosts: int, seed: int, hostile: int = 0, unknown: int = 0
) -> tuple[list[HostSnapshot], KnowledgeBase]:
    """Build a reproducible fleet and the KB that classifies it.

    The KB carries the baseline seed entries, a Known entry for every other
    generated service, and exactly `hostile` Hostile entries; `unknown`
    observed services stay out of the KB entirely, so triage over the fleet
    reports exactly `hostile` red and `unknown` yellow keys (when hosts > 0).
    """
    if hosts < 0 or hostile < 0 or unknown < 0:
        raise InvariantViolation("fleet counts must be non-negative")
    rng = Random(seed)
    generated = _generated_names(rng, hostile + unknown + 12)
    hostile_keys = generated[:hostile]
    unknown_keys = generated[hostile : hostile + unknown]
    benign_keys = generated[hostile + unknown :]
    infos = _service_infos(rng, generated, SEED_ENTRIES)

    host_names = [f"ws{i:02d}" for i in range(1, hosts + 1)]
    fleet: dict[str, dict[str, ServiceRecord]] = {name: {} for name in host_names}

    for host in host_names:
        for name, _desc, recommended in SEED_ENTRIES:
            info = infos[name]
            if recommended is StartupType.DISABLED:
                status = Status.STOPPED
            else:
                status = Status.RUNNING if rng.random() < 0.9 else Status.STOPPED
            fleet[host][info.key] = _record(host, info, status)
        extras = rng.sample(benign_keys, rng.randint(4, min(9, len(benign_keys))))
        for name in extras:
            status = Status.RUNNING if rng.random() < 0.7 else Status.STOPPED
            fleet[host][name] = _record(host, infos[name], status)

    # every hostile/unknown service must actually be observed somewhere
    if host_names:
        for name in hostile_keys + unknown_keys:
            carriers = rng.sample(host_names, rng.randint(1, min(2, hosts)))
            for host in carriers:
                fleet[host][name] = _record(host, infos[name], Status.RUNNING)

    snapshots = []
    for index, host in enumerate(host_names):
        records = tuple(
            fleet[host][key] for key in sorted(fleet[host], key=canonical_key)
        )
        snap = HostSnapshot(
            host=host,
            observed_at=BASE_TS + timedelta(minutes=index),
            records=records,
            processes=_processes(rng, fleet[host], infos),
        )
        snap.validate()
        snapshots.append(snap)

    observed = {key for snap in snapshots for key in snap.record_map()}
    kb = seed_kb(KnowledgeBase())
    for name in benign_keys:
        if canonical_key(name) not in observed:
            continue
        info = infos[name]
        first_word = name.split()[0]
        kb.upsert(
            KbEntry(
                service_key=name,
                verdict=Verdict.KNOWN,
                description=info.description,
                application=f"{first_word} Suite" if first_word in _SUITED else "",
                executable_path=info.path,
                recommended_startup=info.startup,
            )
        )
    for name in hostile_keys:
        kb.upsert(
            KbEntry(
                service_key=name,
                verdict=Verdict.HOSTILE,
                description="Flagged in review; origin unverified",
                executable_path=infos[name].path,
                note="remove on sight",
            )
        )
    return snapshots, kb


# -- serialization -----------------------------------------------------------


def _kb_jsonable(kb: KnowledgeBase) -> list[dict]:
    rows = []
    for entry in kb.entries():
        d = entry.to_dict()
        d.pop("updated_at", None)  # stamped at upsert time, not reproducible
        rows.append(d)
    return rows


def fleet_json(snapshots: list[HostSnapshot], kb: KnowledgeBase) -> bytes:
    """Whole fleet as one JSON document; stable across runs for a fixed seed."""
    doc = {
        "generated_at": format_ts(BASE_TS),
        "snapshots": [snap.to_dict() for snap in snapshots],
        "kb": _kb_jsonable(kb),
    }
    return (json.dumps(doc, indent=2, ensure_ascii=False) + "\n").encode("utf-8")


def write_bundle(
    out_dir: str | Path, snapshots: list[HostSnapshot], kb: KnowledgeBase
) -> list[Path]:
    """Write per-host export and transcript files plus the KB table.

    Layout: exports/<host>.tsv, tasklist/<host>.txt, kb.tsv. Everything is
    re-ingestable through the normal pipeline. Returns the paths written.
    """
    root = Path(out_dir)
    (root / "exports").mkdir(parents=True, exist_ok=True)
    (root / "tasklist").mkdir(parents=True, exist_ok=True)
    written = []
    for snap in snapshots:
        export_path = root / "exports" / f"{snap.host}.tsv"
        export_path.write_bytes(serialize_export(rows_from_records(snap.records)))
        written.append(export_path)
        if snap.processes is not None:
            tl_path = root / "tasklist" / f"{snap.host}.txt"
            tl_path.write_bytes(serialize_tasklist(list(snap.processes)))
            written.append(tl_path)
    kb_path = root / "kb.tsv"
    kb_path.write_bytes(export_kb(kb))
    written.append(kb_path)
    return written
