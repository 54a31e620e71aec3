"""Core domain types shared across the ingest/inventory/classify pipeline.

Service keys are identified case-insensitively (Unicode simple case fold);
``canonical_key`` is the one place that rule lives. Timestamps are UTC at
seconds precision everywhere.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime, timezone
from enum import Enum

from .errors import InvariantViolation

__all__ = [
    "Status",
    "StartupType",
    "LogonAccount",
    "ServiceRecord",
    "ProcessRecord",
    "HostSnapshot",
    "ChangeSet",
    "canonical_key",
    "format_ts",
    "parse_ts",
    "now_ts",
]


def canonical_key(service_key: str) -> str:
    """Canonical identity of a service key: trimmed, case-folded."""
    return service_key.strip().casefold()


def now_ts() -> datetime:
    return datetime.now(timezone.utc).replace(microsecond=0)


def format_ts(ts: datetime) -> str:
    return ts.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def parse_ts(text: str) -> datetime:
    """Parse an ISO-8601 timestamp; naive values are taken as UTC."""
    raw = text.strip()
    if raw.endswith(("Z", "z")):
        raw = raw[:-1] + "+00:00"
    ts = datetime.fromisoformat(raw)
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc).replace(microsecond=0)


class Status(str, Enum):
    RUNNING = "Running"
    STOPPED = "Stopped"


class StartupType(str, Enum):
    AUTOMATIC = "Automatic"
    MANUAL = "Manual"
    DISABLED = "Disabled"


@dataclass(frozen=True)
class LogonAccount:
    """Account a service runs under: one of the three well-known accounts
    or Other(name) for anything else."""

    kind: str  # "local_system" | "local_service" | "network_service" | "other"
    name: str = ""

    _KINDS = ("local_system", "local_service", "network_service", "other")

    def __post_init__(self):
        if self.kind not in self._KINDS:
            raise InvariantViolation(f"bad logon kind {self.kind!r}")
        if self.kind == "other" and not self.name:
            raise InvariantViolation("Other logon account requires a name")

    @classmethod
    def other(cls, name: str) -> "LogonAccount":
        return cls("other", name)

    def render(self) -> str:
        if self.kind == "local_system":
            return "LocalSystem"
        if self.kind == "local_service":
            return "LocalService"
        if self.kind == "network_service":
            return "NetworkService"
        return self.name


LOCAL_SYSTEM = LogonAccount("local_system")
LOCAL_SERVICE = LogonAccount("local_service")
NETWORK_SERVICE = LogonAccount("network_service")


@dataclass(frozen=True)
class ServiceRecord:
    """One service as observed on one host at one collection instant."""

    host: str
    service_key: str  # canonical form
    display_name: str
    description: str
    status: Status
    startup: StartupType
    logon: LogonAccount
    path: str
    manufacturer: str

    def to_dict(self) -> dict:
        return {
            "host": self.host,
            "service_key": self.service_key,
            "display_name": self.display_name,
            "description": self.description,
            "status": self.status.value,
            "startup": self.startup.value,
            "logon": self.logon.render(),
            "path": self.path,
            "manufacturer": self.manufacturer,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ServiceRecord":
        return cls(
            host=d["host"],
            service_key=d["service_key"],
            display_name=d["display_name"],
            description=d["description"],
            status=Status(d["status"]),
            startup=StartupType(d["startup"]),
            logon=parse_logon(d["logon"]),
            path=d["path"],
            manufacturer=d["manufacturer"],
        )


def parse_logon(raw: str) -> LogonAccount:
    """Map a logon string to its account variant.

    The well-known accounts match case-insensitively, with or without the
    space ("Local System" / "LocalSystem") and with or without the
    "NT AUTHORITY\\" qualifier. Anything else becomes Other; blank means
    the default LocalSystem account.
    """
    folded = raw.strip().casefold().replace(" ", "")
    if folded.startswith("ntauthority\\"):
        folded = folded[len("ntauthority\\") :]
    if folded in ("", "localsystem"):
        return LOCAL_SYSTEM
    if folded == "localservice":
        return LOCAL_SERVICE
    if folded == "networkservice":
        return NETWORK_SERVICE
    return LogonAccount.other(raw.strip())


@dataclass(frozen=True)
class ProcessRecord:
    """One process from a tasklist-style listing with the services it hosts."""

    image_name: str
    pid: int
    services: tuple[str, ...] = ()

    def __post_init__(self):
        if self.pid < 0:
            raise InvariantViolation(f"negative pid {self.pid}")
        seen = set()
        for key in self.services:
            if not key:
                raise InvariantViolation("empty service key in process record")
            if key in seen:
                raise InvariantViolation(f"duplicate service {key!r} in process record")
            seen.add(key)

    def to_dict(self) -> dict:
        return {
            "image_name": self.image_name,
            "pid": self.pid,
            "services": list(self.services),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ProcessRecord":
        return cls(d["image_name"], d["pid"], tuple(d["services"]))


@dataclass(frozen=True)
class HostSnapshot:
    """Full service inventory of one host at one collection instant."""

    host: str
    observed_at: datetime
    records: tuple[ServiceRecord, ...]
    processes: tuple[ProcessRecord, ...] | None = None

    def validate(self) -> None:
        """Raise InvariantViolation unless the snapshot is internally consistent."""
        seen: set[str] = set()
        for rec in self.records:
            if rec.host != self.host:
                raise InvariantViolation(
                    f"record host {rec.host!r} differs from snapshot host {self.host!r}"
                )
            key = canonical_key(rec.service_key)
            if key in seen:
                raise InvariantViolation(f"duplicate service key {key!r} in snapshot")
            seen.add(key)
        if self.processes is not None:
            pids = set()
            for proc in self.processes:
                if proc.pid in pids:
                    raise InvariantViolation(f"duplicate pid {proc.pid} in snapshot")
                pids.add(proc.pid)

    def record_map(self) -> dict[str, ServiceRecord]:
        """Records indexed by canonical service key."""
        return {canonical_key(r.service_key): r for r in self.records}

    def to_dict(self) -> dict:
        return {
            "host": self.host,
            "observed_at": format_ts(self.observed_at),
            "records": [r.to_dict() for r in self.records],
            "processes": (
                None
                if self.processes is None
                else [p.to_dict() for p in self.processes]
            ),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "HostSnapshot":
        procs = d.get("processes")
        return cls(
            host=d["host"],
            observed_at=parse_ts(d["observed_at"]),
            records=tuple(ServiceRecord.from_dict(r) for r in d["records"]),
            processes=None if procs is None else tuple(ProcessRecord.from_dict(p) for p in procs),
        )


@dataclass(frozen=True)
class ChangeSet:
    """Drift between two snapshots of the same host."""

    host: str
    from_at: datetime
    to_at: datetime
    added: tuple[str, ...] = ()
    removed: tuple[str, ...] = ()
    status_changed: tuple[tuple[str, Status, Status], ...] = ()
    startup_changed: tuple[tuple[str, StartupType, StartupType], ...] = ()

    def is_empty(self) -> bool:
        return not (
            self.added or self.removed or self.status_changed or self.startup_changed
        )

    def to_dict(self) -> dict:
        return {
            "host": self.host,
            "from_at": format_ts(self.from_at),
            "to_at": format_ts(self.to_at),
            "added": list(self.added),
            "removed": list(self.removed),
            "status_changed": [
                {"service_key": k, "old": old.value, "new": new.value}
                for k, old, new in self.status_changed
            ],
            "startup_changed": [
                {"service_key": k, "old": old.value, "new": new.value}
                for k, old, new in self.startup_changed
            ],
        }
