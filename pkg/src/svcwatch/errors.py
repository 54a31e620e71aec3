"""Exception types raised across the svcwatch modules.

Ingestion errors carry enough context (line number, offending token) to be
reported per-line in lenient mode.
"""

from __future__ import annotations


class SvcwatchError(Exception):
    """Base class for all svcwatch errors."""


class IngestError(SvcwatchError):
    """Base class for file-parsing and normalization errors."""

    def __init__(self, message: str, line_no: int | None = None):
        self.line_no = line_no
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)


class EncodingError(IngestError):
    """Input bytes are not valid UTF-8."""


class MalformedHeader(IngestError):
    """First line does not name the expected columns in order."""


class BadFieldCount(IngestError):
    """Data line split into the wrong number of fields."""


class EmptyKey(IngestError):
    """Host or service key blank after trimming."""


class NoPidToken(IngestError):
    """Tasklist record line contains no all-digit PID token."""


class DuplicatePid(IngestError):
    """Same PID appeared twice within one listing."""

    def __init__(self, pid: int, line_no: int | None = None):
        self.pid = pid
        super().__init__(f"duplicate pid {pid}", line_no)


class UnknownStatus(IngestError):
    """Status token outside the Running/Started/Stopped/blank vocabulary."""

    def __init__(self, raw: str, line_no: int | None = None):
        self.raw = raw
        super().__init__(f"unknown status {raw!r}", line_no)


class UnknownStartup(IngestError):
    """Startup token outside the Automatic/Manual/Disabled vocabulary."""

    def __init__(self, raw: str, line_no: int | None = None):
        self.raw = raw
        super().__init__(f"unknown startup type {raw!r}", line_no)


class DuplicateService(IngestError):
    """Two rows map to the same (host, canonical service key)."""

    def __init__(self, host: str, key: str, line_no: int | None = None):
        self.host = host
        self.key = key
        super().__init__(f"duplicate service {key!r} for host {host!r}", line_no)


class InvariantViolation(SvcwatchError):
    """A domain-type invariant does not hold."""


class StorageFailure(SvcwatchError):
    """The durable store could not be read or written."""


class HostMismatch(SvcwatchError):
    """Operation requires both snapshots to belong to the same host."""


class ConflictingHost(SvcwatchError):
    """One service key claimed by two different processes."""

    def __init__(self, service_key: str, pid_a: int, pid_b: int):
        self.service_key = service_key
        self.pid_a = pid_a
        self.pid_b = pid_b
        super().__init__(
            f"service {service_key!r} hosted by both pid {pid_a} and pid {pid_b}"
        )


class UnsupportedFormat(SvcwatchError):
    """Requested render format is not one of json/html/csv/text."""
