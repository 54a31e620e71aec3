"""Fleet reports over latest snapshots plus the KB, with four renderings.

Four report shapes: per-system listing, hostile/unknown triage, network-wide
aggregation, and the application view. `render` turns any of them into
deterministic JSON, HTML, CSV, or plain-text bytes.
"""

from __future__ import annotations

import html
import json
from dataclasses import dataclass

from .classify import Classification, KnowledgeBase
from .errors import InvariantViolation, UnsupportedFormat
from .ingest import DEFAULT_DELIMITER
from .inventory import InventoryStore
from .model import ServiceRecord, Status, canonical_key

FORMATS = ("json", "html", "csv", "text")

# class names double as classification colors: hostile red, unknown yellow,
# known green
STYLESHEET = (
    "table{border-collapse:collapse}th,td{padding:2px 8px;text-align:left}"
    "th{border-bottom:1px solid #999}"
    ".hostile{color:#c00}.unknown{color:#cc0}.known{color:#0a0}"
)


@dataclass(frozen=True)
class AggregateRow:
    """Fleet-wide running/stopped/total counts for one service."""

    service_key: str
    display_name: str
    running: int
    stopped: int
    total: int
    classification: Classification

    def __post_init__(self):
        if self.running + self.stopped != self.total:
            raise InvariantViolation(
                f"{self.service_key}: running {self.running} + stopped "
                f"{self.stopped} != total {self.total}"
            )
        if self.total < 1:
            raise InvariantViolation(f"{self.service_key}: aggregate row with no hosts")


@dataclass(frozen=True)
class TriageEntry:
    service_key: str
    hosts: tuple[str, ...]  # hosts currently running the service


@dataclass(frozen=True)
class TriageReport:
    """Hostile block first, then unknown; known only when explicitly asked."""

    hostile: tuple[TriageEntry, ...]
    unknown: tuple[TriageEntry, ...]
    include_known: bool
    known: tuple[TriageEntry, ...] = ()


@dataclass(frozen=True)
class ApplicationRow:
    application: str
    description: str
    executable_path: str
    services: tuple[str, ...]

    def __post_init__(self):
        if not self.services:
            raise InvariantViolation(f"{self.application}: application row with no services")
        if len(set(self.services)) != len(self.services):
            raise InvariantViolation(f"{self.application}: duplicate services in row")


@dataclass(frozen=True)
class SystemReport:
    """host -> classified records, hosts and records sorted."""

    hosts: tuple[tuple[str, tuple[tuple[ServiceRecord, Classification], ...]], ...]


@dataclass(frozen=True)
class AggregateReport:
    rows: tuple[AggregateRow, ...]


@dataclass(frozen=True)
class ApplicationReport:
    rows: tuple[ApplicationRow, ...]


Report = SystemReport | TriageReport | AggregateReport | ApplicationReport


# -- builders ----------------------------------------------------------------


def by_system(store: InventoryStore, kb: KnowledgeBase) -> SystemReport:
    """Every host's latest records with their current classification."""
    hosts = []
    for host, snap in sorted(store.latest_snapshots().items()):
        rows = tuple(
            (rec, kb.classify(key)) for key, rec in sorted(snap.record_map().items())
        )
        hosts.append((host, rows))
    return SystemReport(hosts=tuple(hosts))


def _hosts_running(store: InventoryStore) -> dict[str, list[str]]:
    """canonical key -> sorted hosts whose latest snapshot runs it."""
    running: dict[str, list[str]] = {}
    for host, snap in sorted(store.latest_snapshots().items()):
        for key, rec in snap.record_map().items():
            if rec.status is Status.RUNNING:
                running.setdefault(key, []).append(host)
    return {key: sorted(hosts) for key, hosts in running.items()}


def triage(
    store: InventoryStore, kb: KnowledgeBase, include_known: bool = False
) -> TriageReport:
    """Partition every observed service by classification.

    Per service the hosts list names exactly the hosts whose latest snapshot
    shows it Running; services stopped everywhere keep an empty list. The
    known block is suppressed unless include_known is set.
    """
    observed: set[str] = set()
    for snap in store.latest_snapshots().values():
        observed.update(snap.record_map())
    running = _hosts_running(store)
    blocks: dict[Classification, list[TriageEntry]] = {
        Classification.HOSTILE: [],
        Classification.UNKNOWN: [],
        Classification.KNOWN: [],
    }
    for key in sorted(observed):
        entry = TriageEntry(key, tuple(running.get(key, [])))
        blocks[kb.classify(key)].append(entry)
    return TriageReport(
        hostile=tuple(blocks[Classification.HOSTILE]),
        unknown=tuple(blocks[Classification.UNKNOWN]),
        include_known=include_known,
        known=tuple(blocks[Classification.KNOWN]) if include_known else (),
    )


def network_aggregate(store: InventoryStore, kb: KnowledgeBase) -> list[AggregateRow]:
    """One row per distinct service across the fleet's latest snapshots."""
    counts: dict[str, dict[str, int]] = {}
    names: dict[str, tuple[str, str]] = {}  # key -> (host, display_name)
    for host, snap in store.latest_snapshots().items():
        for key, rec in snap.record_map().items():
            tally = counts.setdefault(key, {"running": 0, "stopped": 0})
            if rec.status is Status.RUNNING:
                tally["running"] += 1
            else:
                tally["stopped"] += 1
            # display name from the lexicographically-first host carrying the key
            if key not in names or host < names[key][0]:
                names[key] = (host, rec.display_name)
    rows = []
    for key in sorted(counts):
        running = counts[key]["running"]
        stopped = counts[key]["stopped"]
        rows.append(
            AggregateRow(
                service_key=key,
                display_name=names[key][1],
                running=running,
                stopped=stopped,
                total=running + stopped,
                classification=kb.classify(key),
            )
        )
    return rows


def application_view(kb: KnowledgeBase, store: InventoryStore) -> list[ApplicationRow]:
    """KB entries grouped by application label, limited to observed services."""
    observed = set(store.list_service_keys())
    groups: dict[str, list] = {}
    for entry in kb.entries():
        if entry.application:
            groups.setdefault(entry.application, []).append(entry)
    rows = []
    for label in sorted(groups):
        present = sorted(
            (entry for entry in groups[label] if entry.key() in observed),
            key=lambda e: e.key(),
        )
        if not present:
            continue
        rows.append(
            ApplicationRow(
                application=label,
                description=present[0].description,
                executable_path=present[0].executable_path,
                services=tuple(entry.key() for entry in present),
            )
        )
    return rows


@dataclass(frozen=True)
class ServiceHosts:
    """Drill-down for one service: who runs it, where it sits stopped."""

    service_key: str
    running: tuple[str, ...]
    stopped: tuple[str, ...]


def service_hosts(store: InventoryStore, service_key: str) -> ServiceHosts | None:
    """Per-service host detail from latest snapshots; None if never observed."""
    key = canonical_key(service_key)
    running = []
    stopped = []
    found = False
    for host, snap in sorted(store.latest_snapshots().items()):
        rec = snap.record_map().get(key)
        if rec is None:
            continue
        found = True
        (running if rec.status is Status.RUNNING else stopped).append(host)
    if not found:
        return None
    return ServiceHosts(key, tuple(sorted(running)), tuple(sorted(stopped)))


# -- rendering ---------------------------------------------------------------


def _record_dict(rec: ServiceRecord, classification: Classification) -> dict:
    d = rec.to_dict()
    d["classification"] = classification.value
    return d


def _to_jsonable(report: Report) -> object:
    if isinstance(report, SystemReport):
        return {
            "hosts": {
                host: [_record_dict(rec, cls) for rec, cls in rows]
                for host, rows in report.hosts
            }
        }
    if isinstance(report, TriageReport):
        body: dict = {
            "hostile": [
                {"service_key": e.service_key, "hosts": list(e.hosts)}
                for e in report.hostile
            ],
            "unknown": [
                {"service_key": e.service_key, "hosts": list(e.hosts)}
                for e in report.unknown
            ],
            "include_known": report.include_known,
        }
        if report.include_known:
            body["known"] = [
                {"service_key": e.service_key, "hosts": list(e.hosts)}
                for e in report.known
            ]
        return body
    if isinstance(report, AggregateReport):
        return [
            {
                "service_key": row.service_key,
                "display_name": row.display_name,
                "running": row.running,
                "stopped": row.stopped,
                "total": row.total,
                "classification": row.classification.value,
            }
            for row in report.rows
        ]
    if isinstance(report, ApplicationReport):
        return [
            {
                "application": row.application,
                "description": row.description,
                "executable_path": row.executable_path,
                "services": list(row.services),
            }
            for row in report.rows
        ]
    raise UnsupportedFormat(f"cannot render {type(report).__name__}")


def _clean(value: str, delimiter: str) -> str:
    # ingest delimiter rules: no delimiter or line breaks inside a field
    for bad in (delimiter, "\n", "\r"):
        value = value.replace(bad, " ")
    return value


def _csv_lines(report: Report, delimiter: str) -> list[str]:
    def line(fields) -> str:
        return delimiter.join(_clean(str(f), delimiter) for f in fields)

    if isinstance(report, SystemReport):
        lines = [
            line(
                (
                    "Host",
                    "Service",
                    "DisplayName",
                    "Status",
                    "StartupType",
                    "LogOnAs",
                    "Path",
                    "Manufacturer",
                    "Description",
                    "Classification",
                )
            )
        ]
        for host, rows in report.hosts:
            for rec, cls in rows:
                lines.append(
                    line(
                        (
                            host,
                            rec.service_key,
                            rec.display_name,
                            rec.status.value,
                            rec.startup.value,
                            rec.logon.render(),
                            rec.path,
                            rec.manufacturer,
                            rec.description,
                            cls.value,
                        )
                    )
                )
        return lines
    if isinstance(report, TriageReport):
        lines = [line(("Classification", "Service", "RunningOn"))]
        blocks = [
            (Classification.HOSTILE, report.hostile),
            (Classification.UNKNOWN, report.unknown),
        ]
        if report.include_known:
            blocks.append((Classification.KNOWN, report.known))
        for cls, entries in blocks:
            for entry in entries:
                lines.append(line((cls.value, entry.service_key, ",".join(entry.hosts))))
        return lines
    if isinstance(report, AggregateReport):
        lines = [
            line(("Service", "DisplayName", "Running", "Stopped", "Total", "Classification"))
        ]
        for row in report.rows:
            lines.append(
                line(
                    (
                        row.service_key,
                        row.display_name,
                        row.running,
                        row.stopped,
                        row.total,
                        row.classification.value,
                    )
                )
            )
        return lines
    if isinstance(report, ApplicationReport):
        lines = [line(("Application", "Description", "Path", "Services"))]
        for row in report.rows:
            lines.append(
                line(
                    (
                        row.application,
                        row.description,
                        row.executable_path,
                        ",".join(row.services),
                    )
                )
            )
        return lines
    raise UnsupportedFormat(f"cannot render {type(report).__name__}")


def _html_page(title: str, body: str) -> str:
    return (
        "<!doctype html>\n<html><head><meta charset=\"utf-8\">"
        f"<title>{html.escape(title)}</title>"
        f"<style>{STYLESHEET}</style></head>\n<body>\n"
        f"<h1>{html.escape(title)}</h1>\n{body}</body></html>\n"
    )


def _triage_block_html(cls: Classification, entries) -> list[str]:
    rows = []
    for entry in entries:
        hosts = ", ".join(entry.hosts) if entry.hosts else "(not running anywhere)"
        rows.append(
            f'<tr class="{cls.color_class}"><td>{html.escape(entry.service_key)}</td>'
            f"<td>{html.escape(cls.value)}</td><td>{html.escape(hosts)}</td></tr>"
        )
    return rows


def _to_html(report: Report) -> str:
    if isinstance(report, SystemReport):
        parts = []
        for host, rows in report.hosts:
            parts.append(f"<h2>{html.escape(host)}</h2>")
            parts.append(
                "<table><tr><th>Service</th><th>Display name</th><th>Status</th>"
                "<th>Startup</th><th>Classification</th></tr>"
            )
            for rec, cls in rows:
                parts.append(
                    f'<tr class="{cls.color_class}"><td>{html.escape(rec.service_key)}</td>'
                    f"<td>{html.escape(rec.display_name)}</td>"
                    f"<td>{html.escape(rec.status.value)}</td>"
                    f"<td>{html.escape(rec.startup.value)}</td>"
                    f"<td>{html.escape(cls.value)}</td></tr>"
                )
            parts.append("</table>")
        return _html_page("Services by system", "\n".join(parts) + "\n")
    if isinstance(report, TriageReport):
        rows = ["<table><tr><th>Service</th><th>Classification</th><th>Running on</th></tr>"]
        rows.extend(_triage_block_html(Classification.HOSTILE, report.hostile))
        rows.extend(_triage_block_html(Classification.UNKNOWN, report.unknown))
        if report.include_known:
            rows.extend(_triage_block_html(Classification.KNOWN, report.known))
        rows.append("</table>")
        return _html_page("Service triage", "\n".join(rows) + "\n")
    if isinstance(report, AggregateReport):
        rows = [
            "<table><tr><th>Service</th><th>Display name</th><th>Running</th>"
            "<th>Stopped</th><th>Total</th><th>Classification</th></tr>"
        ]
        for row in report.rows:
            rows.append(
                f'<tr class="{row.classification.color_class}">'
                f"<td>{html.escape(row.service_key)}</td>"
                f"<td>{html.escape(row.display_name)}</td>"
                f"<td>{row.running}</td><td>{row.stopped}</td><td>{row.total}</td>"
                f"<td>{html.escape(row.classification.value)}</td></tr>"
            )
        rows.append("</table>")
        return _html_page("Network service totals", "\n".join(rows) + "\n")
    if isinstance(report, ApplicationReport):
        rows = [
            "<table><tr><th>Application</th><th>Description</th><th>Path</th>"
            "<th>Services</th></tr>"
        ]
        for row in report.rows:
            rows.append(
                f"<tr><td>{html.escape(row.application)}</td>"
                f"<td>{html.escape(row.description)}</td>"
                f"<td>{html.escape(row.executable_path)}</td>"
                f"<td>{html.escape(', '.join(row.services))}</td></tr>"
            )
        rows.append("</table>")
        return _html_page("Applications", "\n".join(rows) + "\n")
    raise UnsupportedFormat(f"cannot render {type(report).__name__}")


def _to_text(report: Report) -> str:
    table = [line.split("\t") for line in _csv_lines(report, "\t")]
    widths = [max(len(row[col]) for row in table) for col in range(len(table[0]))]
    out = []
    for row in table:
        out.append("  ".join(cell.ljust(width) for cell, width in zip(row, widths)).rstrip())
    return "\n".join(out) + "\n"


def render(report: Report, fmt: str) -> bytes:
    """Deterministic bytes for a report in json, html, csv, or text form."""
    if fmt == "json":
        return (json.dumps(_to_jsonable(report), indent=2, ensure_ascii=False) + "\n").encode(
            "utf-8"
        )
    if fmt == "csv":
        return ("\n".join(_csv_lines(report, DEFAULT_DELIMITER)) + "\n").encode("utf-8")
    if fmt == "html":
        return _to_html(report).encode("utf-8")
    if fmt == "text":
        return _to_text(report).encode("utf-8")
    raise UnsupportedFormat(f"unknown format {fmt!r}")
