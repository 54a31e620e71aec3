"""Durable snapshot store and snapshot diffing.

The store is an append-only NDJSON log (one snapshot per line) plus an
in-memory latest-per-host index rebuilt on open. Writes are serialized by a
lock; snapshots are immutable so readers never observe a torn snapshot.
A store opened without a directory is memory-only (tests, one-shot runs).
"""

from __future__ import annotations

import json
import os
import threading
from dataclasses import replace
from datetime import datetime, timedelta
from pathlib import Path

from .errors import HostMismatch, InvariantViolation, StorageFailure
from .model import ChangeSet, HostSnapshot, canonical_key, now_ts

SNAPSHOT_LOG = "snapshots.ndjson"

# how far ahead of the ingestion clock an observation may claim to be
FUTURE_SLACK = timedelta(hours=24)


def diff_snapshots(a: HostSnapshot, b: HostSnapshot) -> ChangeSet:
    """Drift from snapshot a to snapshot b of the same host.

    added/removed are key-set differences; status_changed/startup_changed
    list keys present in both whose field differs. All lists sorted by key.
    """
    if a.host != b.host:
        raise HostMismatch(f"cannot diff {a.host!r} against {b.host!r}")
    old = a.record_map()
    new = b.record_map()
    added = sorted(set(new) - set(old))
    removed = sorted(set(old) - set(new))
    status_changed = []
    startup_changed = []
    for key in sorted(set(old) & set(new)):
        if old[key].status != new[key].status:
            status_changed.append((key, old[key].status, new[key].status))
        if old[key].startup != new[key].startup:
            startup_changed.append((key, old[key].startup, new[key].startup))
    return ChangeSet(
        host=a.host,
        from_at=a.observed_at,
        to_at=b.observed_at,
        added=tuple(added),
        removed=tuple(removed),
        status_changed=tuple(status_changed),
        startup_changed=tuple(startup_changed),
    )


class InventoryStore:
    """Snapshot log with latest-state queries.

    Single-writer: all mutations funnel through one lock. `retain_last`
    caps stored snapshots per host (oldest dropped from the index; the
    on-disk log keeps its append-only history).
    """

    def __init__(self, data_dir: str | Path | None = None, retain_last: int | None = None):
        if retain_last is not None and retain_last < 1:
            raise ValueError("retain_last must be >= 1")
        self._lock = threading.RLock()
        self._retain = retain_last
        self._seq = 0
        # host -> list of (snapshot, seq) in ingestion order
        self._by_host: dict[str, list[tuple[HostSnapshot, int]]] = {}
        self._path: Path | None = None
        if data_dir is not None:
            data_dir = Path(data_dir)
            try:
                data_dir.mkdir(parents=True, exist_ok=True)
            except OSError as exc:
                raise StorageFailure(f"cannot create data dir {data_dir}: {exc}") from exc
            self._path = data_dir / SNAPSHOT_LOG
            self._replay()

    def _replay(self) -> None:
        assert self._path is not None
        if not self._path.exists():
            return
        try:
            with self._path.open("r", encoding="utf-8") as fp:
                for line in fp:
                    line = line.strip()
                    if not line:
                        continue
                    snap = HostSnapshot.from_dict(json.loads(line))
                    self._index(snap)
        except (OSError, ValueError, KeyError) as exc:
            raise StorageFailure(f"corrupt snapshot log {self._path}: {exc}") from exc

    def _index(self, snapshot: HostSnapshot) -> int:
        self._seq += 1
        rows = self._by_host.setdefault(snapshot.host, [])
        rows.append((snapshot, self._seq))
        if self._retain is not None and len(rows) > self._retain:
            # drop from the oldest end of the latest-ordering
            rows.sort(key=lambda item: (item[0].observed_at, item[1]))
            del rows[: len(rows) - self._retain]
            rows.sort(key=lambda item: item[1])
        return self._seq

    def _append_log(self, snapshot: HostSnapshot) -> None:
        if self._path is None:
            return
        try:
            with self._path.open("a", encoding="utf-8") as fp:
                fp.write(json.dumps(snapshot.to_dict(), ensure_ascii=False) + "\n")
                fp.flush()
                os.fsync(fp.fileno())
        except OSError as exc:
            raise StorageFailure(f"cannot append to {self._path}: {exc}") from exc

    def upsert_snapshot(self, snapshot: HostSnapshot) -> int:
        """Persist a snapshot; returns its store id.

        Idempotent: re-ingesting a snapshot identical in (host, observed_at)
        and content returns the existing id without storing anything.
        """
        snapshot.validate()
        if snapshot.observed_at.tzinfo is None:
            raise InvariantViolation("observed_at must be timezone-aware UTC")
        if snapshot.observed_at > now_ts() + FUTURE_SLACK:
            raise InvariantViolation(
                f"observed_at {snapshot.observed_at} is in the future"
            )
        with self._lock:
            for stored, seq in self._by_host.get(snapshot.host, []):
                if stored.observed_at == snapshot.observed_at and stored == snapshot:
                    return seq
            seq = self._index(snapshot)
            self._append_log(snapshot)
            return seq

    def latest(self, host: str) -> HostSnapshot | None:
        """Most recent snapshot for host; observed_at ties go to the later ingest."""
        with self._lock:
            rows = self._by_host.get(host)
            if not rows:
                return None
            return max(rows, key=lambda item: (item[0].observed_at, item[1]))[0]

    def snapshots(self, host: str) -> list[HostSnapshot]:
        """All stored snapshots for host in ingestion order."""
        with self._lock:
            return [snap for snap, _ in self._by_host.get(host, [])]

    def snapshot_at(self, host: str, observed_at: datetime) -> HostSnapshot | None:
        """The snapshot with this exact observed_at (latest-ingested on ties)."""
        with self._lock:
            match = None
            for snap, _ in self._by_host.get(host, []):
                if snap.observed_at == observed_at:
                    match = snap
            return match

    def list_hosts(self) -> list[str]:
        """Sorted hosts that have at least one snapshot."""
        with self._lock:
            return sorted(self._by_host)

    def list_service_keys(self) -> list[str]:
        """Sorted canonical keys drawn from latest snapshots only."""
        keys: set[str] = set()
        with self._lock:
            for host in self._by_host:
                snap = self.latest(host)
                if snap is not None:
                    keys.update(canonical_key(r.service_key) for r in snap.records)
        return sorted(keys)

    def latest_snapshots(self) -> dict[str, HostSnapshot]:
        """Latest snapshot per host, keyed by host."""
        with self._lock:
            out = {}
            for host in self._by_host:
                snap = self.latest(host)
                if snap is not None:
                    out[host] = snap
            return out

    def diff(self, host: str, from_at: datetime, to_at: datetime) -> ChangeSet:
        a = self.snapshot_at(host, from_at)
        b = self.snapshot_at(host, to_at)
        if a is None or b is None:
            missing = from_at if a is None else to_at
            raise KeyError(f"no snapshot for {host!r} at {missing}")
        return diff_snapshots(a, b)

    # -- backup dump ---------------------------------------------------------

    def export_dump(self, fp) -> int:
        """Write every stored snapshot as NDJSON; returns the line count."""
        count = 0
        with self._lock:
            for host in sorted(self._by_host):
                for snap, _ in self._by_host[host]:
                    fp.write(json.dumps(snap.to_dict(), ensure_ascii=False) + "\n")
                    count += 1
        return count

    def import_dump(self, fp) -> int:
        """Ingest an NDJSON dump through the normal upsert path."""
        count = 0
        for line in fp:
            line = line.strip()
            if not line:
                continue
            self.upsert_snapshot(HostSnapshot.from_dict(json.loads(line)))
            count += 1
        return count


def attach_processes(store: InventoryStore, host: str, processes) -> HostSnapshot:
    """Pair a process listing with the host's current inventory.

    The listing replaces whatever process view the latest snapshot carried,
    at the same observation instant; a host with no snapshot yet gets an
    empty-inventory snapshot so the listing is not lost.
    """
    latest = store.latest(host)
    if latest is None:
        snap = HostSnapshot(
            host=host, observed_at=now_ts(), records=(), processes=tuple(processes)
        )
    else:
        snap = replace(latest, processes=tuple(processes))
    store.upsert_snapshot(snap)
    return snap
