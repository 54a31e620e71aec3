"""Command-line interface.

Exit codes: 0 success, 1 bad input (including usage errors), 2 internal
failure. Machine-readable output goes to stdout, diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .api import ApiConfig, serve
from .classify import (
    KbEntry,
    KnowledgeBase,
    Verdict,
    export_kb,
    import_kb,
    policy_violations,
    seed_kb,
)
from .errors import IngestError, StorageFailure, SvcwatchError
from .fleetgen import fleet_json, generate_fleet, write_bundle
from .ingest import (
    DEFAULT_DELIMITER,
    normalize_startup,
    parse_export,
    parse_export_lenient,
    parse_tasklist,
    parse_tasklist_lenient,
    snapshots_from_rows,
)
from .inventory import InventoryStore, attach_processes
from .model import now_ts, parse_ts
from .report import (
    FORMATS,
    AggregateReport,
    ApplicationReport,
    application_view,
    by_system,
    network_aggregate,
    render,
    service_hosts,
    triage,
)

DEFAULT_DATA_DIR = "svcwatch-data"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; the contract here is exit 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _emit(data: bytes) -> None:
    sys.stdout.buffer.write(data)
    sys.stdout.buffer.flush()


def _emit_json(obj) -> None:
    _emit((json.dumps(obj, indent=2, ensure_ascii=False) + "\n").encode("utf-8"))


def _delimiter(raw: str) -> str:
    return "\t" if raw == "\\t" else raw


def _store(args) -> InventoryStore:
    return InventoryStore(args.data_dir)


def _kb(args) -> KnowledgeBase:
    return KnowledgeBase(args.data_dir)


# -- ingest ------------------------------------------------------------------


def _cmd_ingest_export(args) -> int:
    store = _store(args)
    observed_at = now_ts() if args.observed_at is None else parse_ts(args.observed_at)
    delimiter = _delimiter(args.delimiter)
    ingested: dict[str, int] = {}
    for path in args.paths:
        data = Path(path).read_bytes()
        if args.lenient:
            result = parse_export_lenient(data, delimiter=delimiter)
            for err in result.errors:
                print(f"warning: {path}: {err}", file=sys.stderr)
            rows = result.rows
        else:
            rows = parse_export(data, delimiter=delimiter)
        if args.host is not None:
            for row in rows:
                if row.host != args.host:
                    print(
                        f"error: {path}: row host {row.host!r} does not match "
                        f"--host {args.host!r}",
                        file=sys.stderr,
                    )
                    return 1
        for snap in snapshots_from_rows(rows, observed_at=observed_at):
            store.upsert_snapshot(snap)
            ingested[snap.host] = ingested.get(snap.host, 0) + len(snap.records)
    _emit_json({"ingested": ingested})
    return 0


def _cmd_ingest_tasklist(args) -> int:
    store = _store(args)
    data = Path(args.path).read_bytes()
    if args.lenient:
        result = parse_tasklist_lenient(data)
        for err in result.errors:
            print(f"warning: {args.path}: {err}", file=sys.stderr)
        processes = result.rows
    else:
        processes = parse_tasklist(data)
    attach_processes(store, args.host, processes)
    _emit_json({"host": args.host, "processes": len(processes)})
    return 0


# -- report ------------------------------------------------------------------


def _cmd_report(args) -> int:
    store = _store(args)
    kb = _kb(args)
    if args.name == "system":
        rep = by_system(store, kb)
    elif args.name == "triage":
        rep = triage(store, kb, include_known=args.include_known)
    elif args.name == "aggregate":
        rep = AggregateReport(rows=tuple(network_aggregate(store, kb)))
    else:
        rep = ApplicationReport(rows=tuple(application_view(kb, store)))
    _emit(render(rep, args.format))
    return 0


def _cmd_violations(args) -> int:
    store = _store(args)
    kb = _kb(args)
    out = []
    for host, snap in sorted(store.latest_snapshots().items()):
        for key, actual, recommended in policy_violations(snap, kb):
            out.append(
                {
                    "host": host,
                    "service_key": key,
                    "actual": actual.value,
                    "recommended": recommended.value,
                }
            )
    _emit_json(out)
    return 0


def _cmd_services(args) -> int:
    store = _store(args)
    if args.key is None:
        _emit_json(store.list_service_keys())
        return 0
    detail = service_hosts(store, args.key)
    if detail is None:
        print(f"error: service {args.key!r} never observed", file=sys.stderr)
        return 1
    _emit_json(
        {
            "service_key": detail.service_key,
            "running": list(detail.running),
            "stopped": list(detail.stopped),
        }
    )
    return 0


# -- kb ----------------------------------------------------------------------


def _verdict(raw: str) -> Verdict:
    try:
        return Verdict(raw.strip().title())
    except ValueError:
        raise UsageError(f"verdict must be Hostile or Known, not {raw!r}")


def _cmd_kb(args) -> int:
    kb = _kb(args)
    if args.action == "seed":
        seed_kb(kb)
        _emit_json({"entries": len(kb)})
        return 0
    if args.action == "list":
        _emit_json([entry.to_dict() for entry in kb.entries()])
        return 0
    if args.action == "add":
        entry = KbEntry(
            service_key=args.key,
            verdict=_verdict(args.verdict),
            description=args.description,
            application=args.application,
            executable_path=args.path,
            recommended_startup=(
                None if args.recommended is None else normalize_startup(args.recommended)
            ),
            note=args.note,
        )
        kb.upsert(entry)
        stored = kb.get(args.key)
        assert stored is not None
        _emit_json(stored.to_dict())
        return 0
    if args.action == "remove":
        removed = kb.remove(args.key)
        if removed is None:
            print(f"error: no KB entry for {args.key!r}", file=sys.stderr)
            return 1
        _emit_json({"removed": removed.to_dict()})
        return 0
    if args.action == "import":
        count = import_kb(kb, Path(args.path).read_bytes(), delimiter=_delimiter(args.delimiter))
        _emit_json({"imported": count})
        return 0
    # export
    data = export_kb(kb, delimiter=_delimiter(args.delimiter))
    if args.out is None:
        _emit(data)
    else:
        Path(args.out).write_bytes(data)
        print(f"wrote {args.out}", file=sys.stderr)
    return 0


# -- diff / fleet / serve ----------------------------------------------------


def _cmd_diff(args) -> int:
    store = _store(args)
    try:
        change = store.diff(args.host, parse_ts(args.from_ts), parse_ts(args.to_ts))
    except KeyError as exc:
        print(f"error: {exc.args[0]}", file=sys.stderr)
        return 1
    _emit_json(change.to_dict())
    return 0


def _cmd_gen_fleet(args) -> int:
    snapshots, kb = generate_fleet(
        hosts=args.hosts, seed=args.seed, hostile=args.hostile, unknown=args.unknown
    )
    if args.out is None:
        _emit(fleet_json(snapshots, kb))
        return 0
    written = write_bundle(args.out, snapshots, kb)
    _emit_json({"written": [str(p) for p in written]})
    return 0


def _cmd_serve(args) -> int:
    config = ApiConfig(
        listen_host=args.listen,
        port=args.port,
        data_dir=args.data_dir,
        show_known=args.show_known,
        auth_token=args.token,
    )
    serve(config)
    return 0


# -- wiring ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="svcwatch", description="Fleet service inventory and triage.")
    parser.add_argument(
        "--data-dir",
        default=os.environ.get("SVCWATCH_DATA", DEFAULT_DATA_DIR),
        help="state directory (env SVCWATCH_DATA; default ./%s)" % DEFAULT_DATA_DIR,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="load export files or tasklist transcripts")
    isub = p.add_subparsers(dest="kind", required=True)
    pe = isub.add_parser("export", help="tab-delimited service export files")
    pe.add_argument("paths", nargs="+")
    pe.add_argument("--host", help="require every row to belong to this host")
    pe.add_argument("--delimiter", default=DEFAULT_DELIMITER)
    pe.add_argument("--lenient", action="store_true", help="keep good rows, warn on bad")
    pe.add_argument("--observed-at", help="collection instant (default: now)")
    pe.set_defaults(func=_cmd_ingest_export)
    pt = isub.add_parser("tasklist", help="tasklist /svc style transcript")
    pt.add_argument("path")
    pt.add_argument("--host", required=True)
    pt.add_argument("--lenient", action="store_true")
    pt.set_defaults(func=_cmd_ingest_tasklist)

    p = sub.add_parser("report", help="render a fleet report")
    p.add_argument("name", choices=("system", "triage", "aggregate", "apps"))
    p.add_argument("--format", choices=FORMATS, default="json")
    p.add_argument("--include-known", action="store_true")
    p.set_defaults(func=_cmd_report)

    p = sub.add_parser("services", help="list observed services or drill into one")
    p.add_argument("key", nargs="?")
    p.set_defaults(func=_cmd_services)

    p = sub.add_parser("violations", help="startup settings defying KB recommendations")
    p.set_defaults(func=_cmd_violations)

    p = sub.add_parser("kb", help="inspect or edit the knowledge base")
    ksub = p.add_subparsers(dest="action", required=True)
    ksub.add_parser("seed", help="load the baseline entries")
    ksub.add_parser("list")
    ka = ksub.add_parser("add")
    ka.add_argument("key")
    ka.add_argument("--verdict", required=True, help="Hostile or Known")
    ka.add_argument("--description", default="")
    ka.add_argument("--application", default="")
    ka.add_argument("--path", default="")
    ka.add_argument("--recommended", help="Automatic, Manual, or Disabled")
    ka.add_argument("--note", default="")
    kr = ksub.add_parser("remove")
    kr.add_argument("key")
    ki = ksub.add_parser("import")
    ki.add_argument("path")
    ki.add_argument("--delimiter", default=DEFAULT_DELIMITER)
    ke = ksub.add_parser("export")
    ke.add_argument("--out")
    ke.add_argument("--delimiter", default=DEFAULT_DELIMITER)
    p.set_defaults(func=_cmd_kb)

    p = sub.add_parser("diff", help="drift between two snapshots of one host")
    p.add_argument("--host", required=True)
    p.add_argument("--from", dest="from_ts", required=True)
    p.add_argument("--to", dest="to_ts", required=True)
    p.set_defaults(func=_cmd_diff)

    p = sub.add_parser("gen-fleet", help="emit a deterministic synthetic fleet")
    p.add_argument("--hosts", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--hostile", type=int, default=0)
    p.add_argument("--unknown", type=int, default=0)
    p.add_argument("--out", help="write an ingestable bundle here instead of stdout")
    p.set_defaults(func=_cmd_gen_fleet)

    p = sub.add_parser("serve", help="run the HTTP API")
    p.add_argument("--listen", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8787)
    p.add_argument("--token", help="require this bearer token on mutations")
    p.add_argument("--show-known", action="store_true")
    p.set_defaults(func=_cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help / --version paths
        return 0 if exc.code in (0, None) else 1
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (IngestError, FileNotFoundError, IsADirectoryError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SvcwatchError as exc:
        if isinstance(exc, StorageFailure):
            print(f"internal error: {exc}", file=sys.stderr)
            return 2
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except KeyboardInterrupt:
        return 0
    except Exception as exc:  # noqa: BLE001 - last-resort diagnostic
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
