"""Parsers for service export files and tasklist-style process listings.

Export files are strict delimited text: nine columns, mandatory header, no
quoting, the delimiter may not appear inside a field. Tasklist listings are
console transcripts where the first all-digit token on a line is the PID.

Strict parsing fails the whole file on the first bad line; the *_lenient
variants keep good rows and collect per-line errors instead, so a bad fleet
export never silently drops data without an audit trail.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime

from .errors import (
    BadFieldCount,
    DuplicatePid,
    DuplicateService,
    EmptyKey,
    EncodingError,
    IngestError,
    MalformedHeader,
    NoPidToken,
    UnknownStartup,
    UnknownStatus,
)
from .model import (
    HostSnapshot,
    ProcessRecord,
    ServiceRecord,
    StartupType,
    Status,
    canonical_key,
    parse_logon,
)

EXPORT_COLUMNS = (
    "Host",
    "Service",
    "DisplayName",
    "Status",
    "StartupType",
    "LogOnAs",
    "Path",
    "Manufacturer",
    "Description",
)

DEFAULT_DELIMITER = "\t"

NO_SERVICES_TOKEN = "N/A"


@dataclass(frozen=True)
class RawExportRow:
    """One data line of an export file, fields positionally bound, unnormalized."""

    host: str
    service_key: str
    display_name: str
    status_raw: str
    startup_raw: str
    logon_raw: str
    path: str
    manufacturer: str
    description: str

    def fields(self) -> tuple[str, ...]:
        return (
            self.host,
            self.service_key,
            self.display_name,
            self.status_raw,
            self.startup_raw,
            self.logon_raw,
            self.path,
            self.manufacturer,
            self.description,
        )


@dataclass
class LenientResult:
    """Rows that parsed plus the per-line errors for those that did not."""

    rows: list
    errors: list[IngestError]


def _decode(data: bytes) -> str:
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise EncodingError(f"input is not valid UTF-8: {exc}") from None


def _split_lines(text: str) -> list[str]:
    # LF or CRLF accepted; a trailing newline does not produce a final empty line
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    return [line[:-1] if line.endswith("\r") else line for line in lines]


def _iter_export(text: str, delimiter: str):
    """Yield (line_no, row_or_error) pairs for each data line."""
    lines = _split_lines(text)
    if not lines:
        raise MalformedHeader("empty input, header row required")
    header = [col.strip() for col in lines[0].split(delimiter)]
    expected = [col.casefold() for col in EXPORT_COLUMNS]
    if [col.casefold() for col in header] != expected:
        raise MalformedHeader(
            f"expected columns {list(EXPORT_COLUMNS)}, got {header}", line_no=1
        )
    for idx, line in enumerate(lines[1:], start=2):
        fields = line.split(delimiter)
        if len(fields) != len(EXPORT_COLUMNS):
            yield idx, BadFieldCount(
                f"expected {len(EXPORT_COLUMNS)} fields, got {len(fields)}", line_no=idx
            )
            continue
        row = RawExportRow(*fields)
        if not row.host.strip() or not row.service_key.strip():
            yield idx, EmptyKey("host and service key must be non-empty", line_no=idx)
            continue
        yield idx, row


def parse_export(data: bytes, delimiter: str = DEFAULT_DELIMITER) -> list[RawExportRow]:
    """Parse an export file, raising on the first malformed line."""
    rows: list[RawExportRow] = []
    for _, item in _iter_export(_decode(data), delimiter):
        if isinstance(item, IngestError):
            raise item
        rows.append(item)
    return rows


def parse_export_lenient(data: bytes, delimiter: str = DEFAULT_DELIMITER) -> LenientResult:
    """Parse an export file keeping good rows; header errors still empty the result."""
    result = LenientResult(rows=[], errors=[])
    try:
        for _, item in _iter_export(_decode(data), delimiter):
            if isinstance(item, IngestError):
                result.errors.append(item)
            else:
                result.rows.append(item)
    except IngestError as exc:
        result.errors.append(exc)
    return result


def serialize_export(rows: list[RawExportRow], delimiter: str = DEFAULT_DELIMITER) -> bytes:
    """Inverse of parse_export: header plus one line per row, LF endings."""
    lines = [delimiter.join(EXPORT_COLUMNS)]
    for row in rows:
        for value in row.fields():
            if delimiter in value:
                raise ValueError(
                    f"field {value!r} contains the delimiter {delimiter!r}"
                )
            if "\n" in value or "\r" in value:
                raise ValueError(f"field {value!r} contains a line break")
        lines.append(delimiter.join(row.fields()))
    return ("\n".join(lines) + "\n").encode("utf-8")


def rows_from_records(records) -> list[RawExportRow]:
    """Normalized records back to raw rows, ready for serialize_export."""
    return [
        RawExportRow(
            host=rec.host,
            service_key=rec.service_key,
            display_name=rec.display_name,
            status_raw=rec.status.value,
            startup_raw=rec.startup.value,
            logon_raw=rec.logon.render(),
            path=rec.path,
            manufacturer=rec.manufacturer,
            description=rec.description,
        )
        for rec in records
    ]


def normalize_status(raw: str) -> Status:
    """Map export/console status vocabulary onto the two-state enum.

    "Running"/"Started" mean running; "Stopped" or a blank field mean stopped.
    Case-insensitive.
    """
    token = raw.strip().casefold()
    if token in ("running", "started"):
        return Status.RUNNING
    if token in ("stopped", ""):
        return Status.STOPPED
    raise UnknownStatus(raw)


def normalize_startup(raw: str) -> StartupType:
    """Case-insensitive exact match against Automatic/Manual/Disabled."""
    token = raw.strip().casefold()
    for variant in StartupType:
        if token == variant.value.casefold():
            return variant
    raise UnknownStartup(raw)


def to_service_records(
    rows: list[RawExportRow], observed_at: datetime
) -> list[ServiceRecord]:
    """Normalize parsed rows into ServiceRecords with canonical keys.

    Rejects two rows mapping to the same (host, canonical key);
    normalization errors are re-raised with the offending row number.
    """
    records: list[ServiceRecord] = []
    seen: set[tuple[str, str]] = set()
    for idx, row in enumerate(rows, start=1):
        host = row.host.strip()
        key = canonical_key(row.service_key)
        if (host, key) in seen:
            raise DuplicateService(host, key, line_no=idx)
        seen.add((host, key))
        try:
            status = normalize_status(row.status_raw)
            startup = normalize_startup(row.startup_raw)
        except IngestError as exc:
            raise type(exc)(getattr(exc, "raw", ""), line_no=idx) from None
        records.append(
            ServiceRecord(
                host=host,
                service_key=key,
                display_name=row.display_name,
                description=row.description,
                status=status,
                startup=startup,
                logon=parse_logon(row.logon_raw),
                path=row.path,
                manufacturer=row.manufacturer,
            )
        )
    return records


def snapshots_from_rows(
    rows: list[RawExportRow], observed_at: datetime
) -> list[HostSnapshot]:
    """Group normalized records into one snapshot per host, hosts sorted."""
    records = to_service_records(rows, observed_at)
    by_host: dict[str, list[ServiceRecord]] = {}
    for rec in records:
        by_host.setdefault(rec.host, []).append(rec)
    return [
        HostSnapshot(host=host, observed_at=observed_at, records=tuple(by_host[host]))
        for host in sorted(by_host)
    ]


# -- tasklist listings --------------------------------------------------------

_HEADER_TOKENS = ("image", "name", "pid", "services")


def _is_noise_line(line: str) -> bool:
    stripped = line.strip()
    if not stripped:
        return True
    if set(stripped) <= {"=", " ", "\t"}:
        return True  # column separator rule
    tokens = [t.casefold() for t in stripped.split()]
    return tokens == list(_HEADER_TOKENS)


def _split_services(text: str) -> list[str]:
    return [part.strip() for part in text.split(",") if part.strip()]


def _iter_tasklist(text: str):
    """Yield (line_no, record_or_error); continuation lines are merged here."""
    current: dict | None = None  # image, pid, services, line_no

    def finish(entry: dict) -> ProcessRecord:
        # drop repeats while keeping first-seen order
        services = tuple(dict.fromkeys(entry["services"]))
        return ProcessRecord(entry["image"], entry["pid"], services)

    for line_no, line in enumerate(_split_lines(text), start=1):
        if _is_noise_line(line):
            continue
        if line[0] in (" ", "\t"):
            if current is None:
                yield line_no, NoPidToken(
                    "continuation line with no preceding record", line_no=line_no
                )
                continue
            current["services"].extend(_split_services(line))
            continue
        if current is not None:
            yield current["line_no"], finish(current)
            current = None
        tokens = line.split()
        pid_index = next(
            (i for i, tok in enumerate(tokens) if tok.isdigit()), None
        )
        if pid_index is None:
            yield line_no, NoPidToken(f"no pid token in {line!r}", line_no=line_no)
            continue
        image = " ".join(tokens[:pid_index])
        remainder = " ".join(tokens[pid_index + 1 :])
        services = [] if remainder == NO_SERVICES_TOKEN else _split_services(remainder)
        current = {
            "image": image,
            "pid": int(tokens[pid_index]),
            "services": services,
            "line_no": line_no,
        }
    if current is not None:
        yield current["line_no"], finish(current)


def parse_tasklist(data: bytes) -> list[ProcessRecord]:
    """Parse a tasklist transcript, raising on the first malformed record."""
    records: list[ProcessRecord] = []
    pids: set[int] = set()
    for line_no, item in _iter_tasklist(_decode(data)):
        if isinstance(item, IngestError):
            raise item
        if item.pid in pids:
            raise DuplicatePid(item.pid, line_no=line_no)
        pids.add(item.pid)
        records.append(item)
    return records


def parse_tasklist_lenient(data: bytes) -> LenientResult:
    result = LenientResult(rows=[], errors=[])
    pids: set[int] = set()
    try:
        for line_no, item in _iter_tasklist(_decode(data)):
            if isinstance(item, IngestError):
                result.errors.append(item)
            elif item.pid in pids:
                result.errors.append(DuplicatePid(item.pid, line_no=line_no))
            else:
                pids.add(item.pid)
                result.rows.append(item)
    except IngestError as exc:
        result.errors.append(exc)
    return result


def serialize_tasklist(records: list[ProcessRecord]) -> bytes:
    """Emit a parseable transcript: header plus image/pid/services columns."""
    lines = ["Image Name\tPID\tServices"]
    for rec in records:
        services = ", ".join(rec.services) if rec.services else NO_SERVICES_TOKEN
        lines.append(f"{rec.image_name}\t{rec.pid}\t{services}")
    return ("\n".join(lines) + "\n").encode("utf-8")
