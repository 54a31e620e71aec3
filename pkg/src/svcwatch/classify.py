"""Knowledge base of service verdicts and tri-state classification.

A KB entry maps a canonical service key to Hostile or Known; a key without
an entry is Unknown. The KB persists as an append-only NDJSON event log
(upsert/remove events replayed on open), and round-trips through a
delimited text file for operator exchange.
"""

from __future__ import annotations

import json
import os
import threading
from dataclasses import dataclass, replace
from datetime import datetime
from enum import Enum
from pathlib import Path

from .errors import (
    BadFieldCount,
    EncodingError,
    InvariantViolation,
    MalformedHeader,
    StorageFailure,
)
from .ingest import DEFAULT_DELIMITER, normalize_startup
from .model import (
    HostSnapshot,
    StartupType,
    canonical_key,
    format_ts,
    now_ts,
    parse_ts,
)

KB_LOG = "kb.ndjson"

KB_COLUMNS = (
    "Service",
    "Verdict",
    "Description",
    "Application",
    "Path",
    "RecommendedStartup",
    "Note",
)


class Classification(str, Enum):
    HOSTILE = "Hostile"
    UNKNOWN = "Unknown"
    KNOWN = "Known"

    @property
    def color(self) -> str:
        return _COLORS[self]

    @property
    def color_class(self) -> str:
        """CSS class name used by HTML renderings."""
        return self.value.lower()


_COLORS = {
    Classification.HOSTILE: "red",
    Classification.UNKNOWN: "yellow",
    Classification.KNOWN: "green",
}


class Verdict(str, Enum):
    HOSTILE = "Hostile"
    KNOWN = "Known"

    def classification(self) -> Classification:
        return Classification(self.value)


@dataclass(frozen=True)
class KbEntry:
    """One knowledge-base row: what a service is and whether it may run."""

    service_key: str
    verdict: Verdict
    description: str = ""
    application: str = ""
    executable_path: str = ""
    recommended_startup: StartupType | None = None
    updated_at: datetime | None = None
    note: str = ""

    def __post_init__(self):
        if not canonical_key(self.service_key):
            raise InvariantViolation("KB entry requires a non-empty service key")
        if not isinstance(self.verdict, Verdict):
            raise InvariantViolation(f"bad verdict {self.verdict!r}")

    def key(self) -> str:
        return canonical_key(self.service_key)

    def to_dict(self) -> dict:
        return {
            "service_key": self.service_key,
            "verdict": self.verdict.value,
            "description": self.description,
            "application": self.application,
            "executable_path": self.executable_path,
            "recommended_startup": (
                None if self.recommended_startup is None else self.recommended_startup.value
            ),
            "updated_at": None if self.updated_at is None else format_ts(self.updated_at),
            "note": self.note,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "KbEntry":
        rec = d.get("recommended_startup")
        upd = d.get("updated_at")
        return cls(
            service_key=d["service_key"],
            verdict=Verdict(d["verdict"]),
            description=d.get("description", ""),
            application=d.get("application", ""),
            executable_path=d.get("executable_path", ""),
            recommended_startup=None if rec in (None, "") else StartupType(rec),
            updated_at=None if upd in (None, "") else parse_ts(upd),
            note=d.get("note", ""),
        )


class KnowledgeBase:
    """Mutable verdict store; mutations serialized, reads consistent."""

    def __init__(self, data_dir: str | Path | None = None):
        self._lock = threading.RLock()
        self._entries: dict[str, KbEntry] = {}
        self._path: Path | None = None
        if data_dir is not None:
            data_dir = Path(data_dir)
            try:
                data_dir.mkdir(parents=True, exist_ok=True)
            except OSError as exc:
                raise StorageFailure(f"cannot create data dir {data_dir}: {exc}") from exc
            self._path = data_dir / KB_LOG
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
                    event = json.loads(line)
                    if event["op"] == "upsert":
                        entry = KbEntry.from_dict(event["entry"])
                        self._entries[entry.key()] = entry
                    elif event["op"] == "remove":
                        self._entries.pop(event["service_key"], None)
        except (OSError, ValueError, KeyError) as exc:
            raise StorageFailure(f"corrupt KB log {self._path}: {exc}") from exc

    def _append_event(self, event: dict) -> None:
        if self._path is None:
            return
        try:
            with self._path.open("a", encoding="utf-8") as fp:
                fp.write(json.dumps(event, ensure_ascii=False) + "\n")
                fp.flush()
                os.fsync(fp.fileno())
        except OSError as exc:
            raise StorageFailure(f"cannot append to {self._path}: {exc}") from exc

    def classify(self, service_key: str) -> Classification:
        """Hostile/Known per the stored verdict; Unknown when no entry exists."""
        with self._lock:
            entry = self._entries.get(canonical_key(service_key))
        if entry is None:
            return Classification.UNKNOWN
        return entry.verdict.classification()

    def get(self, service_key: str) -> KbEntry | None:
        with self._lock:
            return self._entries.get(canonical_key(service_key))

    def upsert(self, entry: KbEntry) -> KbEntry | None:
        """Store an entry (replacing any prior one); returns what was replaced.

        updated_at is stamped by the store clock, not taken from the caller.
        """
        stamped = replace(entry, updated_at=now_ts())
        with self._lock:
            previous = self._entries.get(stamped.key())
            self._entries[stamped.key()] = stamped
            self._append_event({"op": "upsert", "entry": stamped.to_dict()})
            return previous

    def remove(self, service_key: str) -> KbEntry | None:
        """Delete the entry for a key; absent keys are a no-op returning None."""
        key = canonical_key(service_key)
        with self._lock:
            previous = self._entries.pop(key, None)
            if previous is not None:
                self._append_event({"op": "remove", "service_key": key})
            return previous

    def entries(self) -> list[KbEntry]:
        """All entries sorted by canonical key."""
        with self._lock:
            return [self._entries[k] for k in sorted(self._entries)]

    def __len__(self) -> int:
        with self._lock:
            return len(self._entries)


# Baseline entries: common Windows services every fleet shows, plus the
# risky built-ins that ship enabled but should not be. Keys are the names
# administrators see; descriptions are operator guidance, not vendor text.
SEED_ENTRIES: tuple[tuple[str, str, StartupType], ...] = (
    ("DNS Client", "Resolves and caches DNS names", StartupType.AUTOMATIC),
    ("DHCP Client", "Obtains network addresses via DHCP", StartupType.AUTOMATIC),
    ("Error Reporting", "Uploads crash reports to the vendor", StartupType.AUTOMATIC),
    ("Event Log", "Records system and application events", StartupType.AUTOMATIC),
    ("Help", "Backs the built-in help and support center", StartupType.AUTOMATIC),
    ("Print Spooler", "Queues and schedules print jobs", StartupType.AUTOMATIC),
    ("Protected Storage", "Safeguards credentials and private keys", StartupType.AUTOMATIC),
    ("ClipBook", "Shares clipboard pages over the network; rarely wanted", StartupType.DISABLED),
    ("Alerter", "Pushes administrative alert messages; abuse-prone", StartupType.DISABLED),
    ("Telnet", "Remote shell over a plaintext protocol", StartupType.DISABLED),
)


def seed_kb(kb: KnowledgeBase) -> KnowledgeBase:
    """Load the baseline Known entries; idempotent (upsert by key)."""
    for name, description, recommended in SEED_ENTRIES:
        kb.upsert(
            KbEntry(
                service_key=name,
                verdict=Verdict.KNOWN,
                description=description,
                recommended_startup=recommended,
            )
        )
    return kb


def policy_violations(
    snapshot: HostSnapshot, kb: KnowledgeBase
) -> list[tuple[str, StartupType, StartupType]]:
    """(key, actual, recommended) for records whose startup defies the KB
    recommendation; sorted by key."""
    out = []
    for key, rec in sorted(snapshot.record_map().items()):
        entry = kb.get(key)
        if entry is None or entry.recommended_startup is None:
            continue
        if rec.startup != entry.recommended_startup:
            out.append((key, rec.startup, entry.recommended_startup))
    return out


# -- delimited import/export -------------------------------------------------


def export_kb(kb: KnowledgeBase, delimiter: str = DEFAULT_DELIMITER) -> bytes:
    """KB as delimited text, same structural rules as the ingest format."""
    lines = [delimiter.join(KB_COLUMNS)]
    for entry in kb.entries():
        fields = (
            entry.service_key,
            entry.verdict.value,
            entry.description,
            entry.application,
            entry.executable_path,
            "" if entry.recommended_startup is None else entry.recommended_startup.value,
            entry.note,
        )
        for value in fields:
            if delimiter in value or "\n" in value or "\r" in value:
                raise ValueError(f"field {value!r} contains the delimiter or a line break")
        lines.append(delimiter.join(fields))
    return ("\n".join(lines) + "\n").encode("utf-8")


def import_kb(
    kb: KnowledgeBase, data: bytes, delimiter: str = DEFAULT_DELIMITER
) -> int:
    """Upsert entries from a delimited KB file; returns how many were loaded."""
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise EncodingError(f"input is not valid UTF-8: {exc}") from None
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    lines = [line[:-1] if line.endswith("\r") else line for line in lines]
    if not lines:
        raise MalformedHeader("empty input, header row required")
    header = [col.strip().casefold() for col in lines[0].split(delimiter)]
    if header != [col.casefold() for col in KB_COLUMNS]:
        raise MalformedHeader(
            f"expected columns {list(KB_COLUMNS)}, got {lines[0].split(delimiter)}",
            line_no=1,
        )
    count = 0
    for idx, line in enumerate(lines[1:], start=2):
        fields = line.split(delimiter)
        if len(fields) != len(KB_COLUMNS):
            raise BadFieldCount(
                f"expected {len(KB_COLUMNS)} fields, got {len(fields)}", line_no=idx
            )
        key, verdict_raw, description, application, path, rec_raw, note = fields
        try:
            verdict = Verdict(verdict_raw.strip().title())
        except ValueError:
            raise InvariantViolation(
                f"line {idx}: verdict must be Hostile or Known, got {verdict_raw!r}"
            ) from None
        recommended = None if not rec_raw.strip() else normalize_startup(rec_raw)
        kb.upsert(
            KbEntry(
                service_key=key,
                verdict=verdict,
                description=description,
                application=application,
                executable_path=path,
                recommended_startup=recommended,
                note=note,
            )
        )
        count += 1
    return count
