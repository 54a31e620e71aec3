"""HTTP front end: ingestion, inventory queries, KB edits, and reports.

JSON bodies everywhere except the /reports/*.html variants. Report payloads
are produced by the same renderer the CLI uses, so the two stay byte-identical.
Mutating routes (POST/DELETE) honor an optional shared bearer token.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from fastapi import Depends, FastAPI, HTTPException, Query, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware

from .classify import KbEntry, KnowledgeBase, policy_violations
from .errors import (
    HostMismatch,
    IngestError,
    InvariantViolation,
    UnsupportedFormat,
)
from .ingest import (
    DEFAULT_DELIMITER,
    parse_export,
    parse_tasklist,
    snapshots_from_rows,
)
from .inventory import InventoryStore, attach_processes
from .model import now_ts, parse_ts
from .report import (
    AggregateReport,
    ApplicationReport,
    application_view,
    by_system,
    network_aggregate,
    render,
    service_hosts,
    triage,
)


@dataclass(frozen=True)
class ApiConfig:
    """Server knobs; data_dir None keeps everything in memory."""

    listen_host: str = "127.0.0.1"
    port: int = 8787
    data_dir: str | None = None
    delimiter: str = DEFAULT_DELIMITER
    show_known: bool = False  # default for the triage report's green block
    auth_token: str | None = None

    def __post_init__(self):
        if not 1 <= self.port <= 65535:
            raise InvariantViolation(f"port {self.port} out of range")


def _json_bytes(obj) -> bytes:
    return (json.dumps(obj, indent=2, ensure_ascii=False) + "\n").encode("utf-8")


def _json_response(obj, status_code: int = 200) -> Response:
    return Response(
        content=_json_bytes(obj),
        status_code=status_code,
        media_type="application/json",
    )


def create_app(
    config: ApiConfig | None = None,
    store: InventoryStore | None = None,
    kb: KnowledgeBase | None = None,
) -> FastAPI:
    """Wire the endpoints over a store and KB (injectable for tests)."""
    config = config or ApiConfig()
    if store is None:
        store = InventoryStore(config.data_dir)
    if kb is None:
        kb = KnowledgeBase(config.data_dir)

    app = FastAPI(title="svcwatch", docs_url=None, redoc_url=None)
    # the browser console may be served from another origin; token auth is
    # header-based, so a permissive CORS policy leaks nothing
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    app.state.config = config
    app.state.store = store
    app.state.kb = kb

    def require_token(request: Request) -> None:
        if config.auth_token is None:
            return
        if request.headers.get("authorization") != f"Bearer {config.auth_token}":
            raise HTTPException(status_code=401, detail="missing or wrong bearer token")

    guarded = [Depends(require_token)]

    @app.exception_handler(IngestError)
    async def _ingest_error(request: Request, exc: IngestError):
        body = {"error": str(exc)}
        if getattr(exc, "line_no", None) is not None:
            body["line_no"] = exc.line_no
        return _json_response(body, 400)

    @app.exception_handler(InvariantViolation)
    async def _invariant_error(request: Request, exc: InvariantViolation):
        return _json_response({"error": str(exc)}, 422)

    @app.exception_handler(HostMismatch)
    async def _mismatch_error(request: Request, exc: HostMismatch):
        return _json_response({"error": str(exc)}, 422)

    @app.exception_handler(UnsupportedFormat)
    async def _format_error(request: Request, exc: UnsupportedFormat):
        return _json_response({"error": str(exc)}, 400)

    @app.exception_handler(RequestValidationError)
    async def _validation_error(request: Request, exc: RequestValidationError):
        return _json_response({"error": "malformed request", "detail": exc.errors()}, 400)

    # -- inventory ----------------------------------------------------------

    @app.get("/hosts")
    def hosts():
        return _json_response(store.list_hosts())

    @app.get("/hosts/{host}/snapshot")
    def host_snapshot(host: str):
        snap = store.latest(host)
        if snap is None:
            raise HTTPException(status_code=404, detail=f"unknown host {host!r}")
        return _json_response(snap.to_dict())

    @app.get("/hosts/{host}/diff")
    def host_diff(host: str, from_ts: str = Query(alias="from"), to_ts: str = Query(alias="to")):
        try:
            from_at = parse_ts(from_ts)
            to_at = parse_ts(to_ts)
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=f"bad timestamp: {exc}")
        try:
            change = store.diff(host, from_at, to_at)
        except KeyError as exc:
            raise HTTPException(status_code=404, detail=str(exc.args[0]))
        return _json_response(change.to_dict())

    # -- ingestion ----------------------------------------------------------

    @app.post("/ingest/export", dependencies=guarded)
    async def ingest_export(
        request: Request, host: str | None = None, observed_at: str | None = None
    ):
        body = await request.body()
        try:
            at = now_ts() if observed_at is None else parse_ts(observed_at)
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=f"bad timestamp: {exc}")
        rows = parse_export(body, delimiter=config.delimiter)
        if host is not None:
            for row in rows:
                if row.host != host:
                    raise HostMismatch(
                        f"row host {row.host!r} does not match requested host {host!r}"
                    )
        ingested = {}
        for snap in snapshots_from_rows(rows, observed_at=at):
            store.upsert_snapshot(snap)
            ingested[snap.host] = len(snap.records)
        return _json_response({"ingested": ingested}, 201)

    @app.post("/ingest/tasklist", dependencies=guarded)
    async def ingest_tasklist(request: Request, host: str):
        body = await request.body()
        processes = parse_tasklist(body)
        attach_processes(store, host, processes)
        return _json_response({"host": host, "processes": len(processes)}, 201)

    # -- services -----------------------------------------------------------

    @app.get("/services")
    def services():
        return _json_response(store.list_service_keys())

    @app.get("/services/{key}/hosts")
    def service_detail(key: str):
        detail = service_hosts(store, key)
        if detail is None:
            raise HTTPException(status_code=404, detail=f"service {key!r} never observed")
        return _json_response(
            {
                "service_key": detail.service_key,
                "running": list(detail.running),
                "stopped": list(detail.stopped),
            }
        )

    # -- reports ------------------------------------------------------------

    def _report(name: str, include_known: bool):
        if name == "system":
            return by_system(store, kb)
        if name == "triage":
            return triage(store, kb, include_known=include_known)
        if name == "aggregate":
            return AggregateReport(rows=tuple(network_aggregate(store, kb)))
        if name == "apps":
            return ApplicationReport(rows=tuple(application_view(kb, store)))
        raise HTTPException(status_code=404, detail=f"unknown report {name!r}")

    @app.get("/reports/{name}.html")
    def report_html(name: str, include_known: bool | None = None):
        flag = config.show_known if include_known is None else include_known
        body = render(_report(name, flag), "html")
        return Response(content=body, media_type="text/html; charset=utf-8")

    @app.get("/reports/{name}")
    def report_json(name: str, include_known: bool | None = None):
        flag = config.show_known if include_known is None else include_known
        body = render(_report(name, flag), "json")
        return Response(content=body, media_type="application/json")

    # -- knowledge base -----------------------------------------------------

    @app.get("/kb")
    def kb_list():
        return _json_response([entry.to_dict() for entry in kb.entries()])

    @app.post("/kb/classify", dependencies=guarded)
    async def kb_classify(request: Request):
        raw = await request.body()
        try:
            payload = json.loads(raw)
        except ValueError:
            raise HTTPException(status_code=400, detail="body is not valid JSON")
        if not isinstance(payload, dict):
            raise HTTPException(status_code=400, detail="body must be a JSON object")
        try:
            entry = KbEntry.from_dict(payload)
        except InvariantViolation:
            raise
        except (KeyError, ValueError) as exc:
            raise InvariantViolation(f"bad KB entry: {exc}")
        previous = kb.upsert(entry)
        stored = kb.get(entry.service_key)
        assert stored is not None
        return _json_response(stored.to_dict(), 200 if previous is not None else 201)

    @app.delete("/kb/{key}", dependencies=guarded)
    def kb_delete(key: str):
        removed = kb.remove(key)
        if removed is None:
            raise HTTPException(status_code=404, detail=f"no KB entry for {key!r}")
        return _json_response({"removed": removed.to_dict()})

    # -- policy -------------------------------------------------------------

    @app.get("/policy/violations")
    def violations():
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
        return _json_response(out)

    return app


def serve(config: ApiConfig) -> None:
    """Run the API until interrupted; data must be writable before binding."""
    import uvicorn

    if config.data_dir is not None:
        Path(config.data_dir).mkdir(parents=True, exist_ok=True)
    app = create_app(config)
    uvicorn.run(app, host=config.listen_host, port=config.port, log_level="warning")
