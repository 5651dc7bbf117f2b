"""JSON-over-HTTP facade over the core operations.

The service layer holds no business logic: every response body is
reproducible by calling the corresponding core operation directly. It is
read-only unless commit is enabled at startup. Walk sessions live in an
in-process store keyed by unguessable ids and expire after an idle
timeout.
"""

from __future__ import annotations

import json
import secrets
import threading
import time
from dataclasses import dataclass, field
from datetime import datetime
from decimal import Decimal
from pathlib import Path

from fastapi import FastAPI, HTTPException, Request, Response

from . import audit, engine, walker
from .engine import EvalResult, InputOverrideError
from .formula import (
    ConditionalAggregate,
    ConditionalError,
    FormulaError,
    compile_conditional,
    decompile_array,
    parse_a1,
    parse_named,
    print_a1,
    print_named,
)
from .graph import DependencyGraph, build_graph
from .model import (
    AmbiguousNameError,
    CellId,
    DocumentError,
    SheetRole,
    UnresolvedNameError,
    Workbook,
    load_workbook,
    save_workbook,
)
from .values import json_to_value, render_value


@dataclass
class ServiceConfig:
    workbook_path: str
    log_path: str | None = None
    allow_commit: bool = False
    static_dir: str | None = None
    session_idle_timeout: float = 3600.0


class SessionStore:
    """Walk sessions keyed by 128-bit random ids, evicted lazily after the
    idle timeout."""

    def __init__(self, idle_timeout: float = 3600.0, clock=time.monotonic):
        self.idle_timeout = idle_timeout
        self.clock = clock
        self._sessions: dict[str, tuple[walker.WalkSession, float]] = {}
        self._lock = threading.Lock()

    def _sweep(self) -> None:
        now = self.clock()
        dead = [k for k, (_, seen) in self._sessions.items() if now - seen > self.idle_timeout]
        for k in dead:
            del self._sessions[k]

    def create(self, session: walker.WalkSession) -> str:
        sid = secrets.token_urlsafe(16)
        with self._lock:
            self._sweep()
            self._sessions[sid] = (session, self.clock())
        return sid

    def get(self, sid: str) -> walker.WalkSession:
        with self._lock:
            self._sweep()
            if sid not in self._sessions:
                raise KeyError(sid)
            session, _ = self._sessions[sid]
            self._sessions[sid] = (session, self.clock())
            return session

    def put(self, sid: str, session: walker.WalkSession) -> None:
        with self._lock:
            self._sessions[sid] = (session, self.clock())


@dataclass
class ServiceState:
    config: ServiceConfig
    workbook: Workbook
    graph: DependencyGraph
    result: EvalResult
    log: audit.AuditLog | None
    sessions: SessionStore
    commit_lock: threading.Lock = field(default_factory=threading.Lock)

    def reload(self, workbook: Workbook) -> None:
        self.workbook = workbook
        self.graph = build_graph(workbook)
        self.result = engine.recalculate(workbook, self.graph)


def _row_json(row: walker.WalkRow) -> dict:
    return {
        "sheetname": row.sheetname,
        "name": row.name,
        "value": render_value(row.value),
        "formula": row.formula,
    }


def _view_json(state: ServiceState, cell: CellId) -> dict:
    view = walker.inspect(state.workbook, state.result, cell, state.graph)
    current = _row_json(view.current)
    current["formula_a1"] = walker.a1_formula(state.workbook, cell)
    return {
        "cell": str(cell),
        "precedents": [_row_json(r) for r in view.precedents],
        "current": current,
        "dependents": [_row_json(r) for r in view.dependents],
    }


def _unprocessable(e: Exception) -> HTTPException:
    return HTTPException(status_code=422, detail=str(e))


async def _body_json(request: Request) -> dict:
    raw = await request.body()
    try:
        obj = json.loads(raw.decode("utf-8") or "{}", parse_float=Decimal)
    except (json.JSONDecodeError, UnicodeDecodeError) as e:
        raise HTTPException(status_code=422, detail=f"bad JSON body: {e}")
    if not isinstance(obj, dict):
        raise HTTPException(status_code=422, detail="body must be a JSON object")
    return obj


def create_app(
    workbook: Workbook,
    log: audit.AuditLog | None = None,
    config: ServiceConfig | None = None,
    sessions: SessionStore | None = None,
) -> FastAPI:
    if config is None:
        config = ServiceConfig(workbook_path="")
    state = ServiceState(
        config=config,
        workbook=workbook,
        graph=build_graph(workbook),
        result=engine.recalculate(workbook),
        log=log,
        sessions=sessions or SessionStore(config.session_idle_timeout),
    )
    app = FastAPI(title="nmd", docs_url=None, redoc_url=None)
    app.state.nmd = state

    @app.get("/api/workbook")
    def get_workbook() -> dict:
        w = state.workbook
        inputs = []
        for sheet in w.sheets:
            if sheet.role is not SheetRole.INPUT:
                continue
            for name in sorted(sheet.named_cells):
                cell = CellId.parse(f"{sheet.name}!{sheet.named_cells[name]}")
                inputs.append({
                    "label": name,
                    "cell": str(cell),
                    "value": render_value(state.result.combined(cell)),
                })
        return {
            "name": w.name,
            "version": w.version,
            "revision": w.revision,
            "sheets": [
                {
                    "name": s.name,
                    "role": s.role.value,
                    "first_data_row": s.first_data_row,
                    "last_data_row": s.last_data_row,
                    "columns": [
                        {"letter": c.letter, "name": c.name} for c in s.columns
                    ],
                    "named_cells": {n: s.named_cells[n] for n in sorted(s.named_cells)},
                }
                for s in w.sheets
            ],
            "inputs": inputs,
        }

    @app.get("/api/cells/{sheet}/{addr}")
    def get_cell(sheet: str, addr: str) -> dict:
        try:
            cell = CellId.parse(f"{sheet}!{addr}")
        except ValueError as e:
            raise _unprocessable(e)
        try:
            return _view_json(state, cell)
        except walker.WalkError as e:
            raise HTTPException(status_code=404, detail=str(e))

    @app.post("/api/sessions")
    async def create_session(request: Request) -> dict:
        body = await _body_json(request)
        cell_text = body.get("cell")
        if not isinstance(cell_text, str):
            raise HTTPException(status_code=422, detail="body needs 'cell'")
        try:
            cell = CellId.parse(cell_text)
            session = walker.new_session(
                state.workbook, cell, created_by=str(body.get("user", "")), graph=state.graph
            )
        except walker.WalkError as e:
            raise HTTPException(status_code=404, detail=str(e))
        except ValueError as e:
            raise _unprocessable(e)
        sid = state.sessions.create(session)
        return {"id": sid, "view": _view_json(state, cell)}

    def _session(sid: str) -> walker.WalkSession:
        try:
            return state.sessions.get(sid)
        except KeyError:
            raise HTTPException(status_code=404, detail="unknown session")

    @app.post("/api/sessions/{sid}/step")
    async def session_step(sid: str, request: Request) -> dict:
        session = _session(sid)
        body = await _body_json(request)
        direction = body.get("direction")
        index = body.get("index")
        if direction not in (walker.INTO_PRECEDENT, walker.INTO_DEPENDENT) or not isinstance(index, int):
            raise HTTPException(
                status_code=422,
                detail="body needs direction (into-precedent|into-dependent) and integer index",
            )
        try:
            session = walker.step(session, direction, index)
        except walker.WalkError as e:
            raise _unprocessable(e)
        state.sessions.put(sid, session)
        return _view_json(state, session.current)

    @app.post("/api/sessions/{sid}/back")
    def session_back(sid: str) -> dict:
        session = _session(sid)
        try:
            session = walker.back(session)
        except walker.WalkError as e:
            raise _unprocessable(e)
        state.sessions.put(sid, session)
        return _view_json(state, session.current)

    @app.get("/api/sessions/{sid}/trail")
    def session_trail(sid: str) -> Response:
        session = _session(sid)
        text = walker.export_trail(session, state.result)
        return Response(content=text, media_type="text/plain; charset=utf-8")

    @app.post("/api/whatif")
    async def whatif(request: Request) -> dict:
        body = await _body_json(request)
        overrides_obj = body.get("overrides", {})
        if not isinstance(overrides_obj, dict):
            raise HTTPException(status_code=422, detail="'overrides' must be a map")
        try:
            overrides = {k: json_to_value(v) for k, v in overrides_obj.items()}
            delta = engine.what_if(state.workbook, overrides)
        except (ValueError, TypeError) as e:
            # covers override-target violations, unresolved names, bad values
            raise _unprocessable(e)
        return {
            "changes": [
                {
                    "cell": str(d.cell),
                    "label": d.label,
                    "before": render_value(d.before),
                    "after": render_value(d.after),
                }
                for d in delta
            ]
        }

    @app.get("/api/history")
    def get_history(version: int | None = None) -> dict:
        if state.log is None:
            return {"records": []}
        records = audit.history(state.log, version=version)
        return {
            "records": [
                {
                    "version": r.version,
                    "revision": r.revision,
                    "description": r.description,
                    "modified_by": r.modified_by,
                    "modified_on": r.modified_on.strftime(audit.HISTORY_TS),
                    "comments": [
                        {"text": c.text, "user": c.user, "at": c.at.strftime(audit.EXPORT_TS)}
                        for c in r.comments
                    ],
                }
                for r in records
            ]
        }

    @app.post("/api/compile")
    async def compile_endpoint(request: Request) -> dict:
        body = await _body_json(request)
        text, host = body.get("text"), body.get("host")
        if not isinstance(text, str) or not isinstance(host, str):
            raise HTTPException(status_code=422, detail="body needs 'text' and 'host'")
        try:
            item = parse_named(text, state.workbook)
            if not isinstance(item, ConditionalAggregate):
                raise HTTPException(status_code=422, detail="not a conditional aggregate")
            ast = compile_conditional(item, state.workbook, host)
        except (FormulaError, ConditionalError, UnresolvedNameError, AmbiguousNameError, ValueError) as e:
            raise _unprocessable(e)
        return {"a1": print_a1(ast), "array": True}

    @app.post("/api/decompile")
    async def decompile_endpoint(request: Request) -> dict:
        body = await _body_json(request)
        text = body.get("text")
        if not isinstance(text, str):
            raise HTTPException(status_code=422, detail="body needs 'text'")
        try:
            item = decompile_array(parse_a1(text), state.workbook)
            named = print_named(item, state.workbook)
        except (FormulaError, ConditionalError, UnresolvedNameError, AmbiguousNameError) as e:
            raise _unprocessable(e)
        return {"named": named}

    @app.post("/api/commit")
    async def commit_endpoint(request: Request) -> dict:
        if not config.allow_commit:
            raise HTTPException(status_code=404, detail="commit endpoint not enabled")
        if state.log is None:
            raise HTTPException(status_code=422, detail="no audit log configured")
        body = await _body_json(request)
        user = body.get("user")
        message = body.get("message")
        document = body.get("document")
        if not isinstance(user, str) or not isinstance(message, str) or not isinstance(document, str):
            raise HTTPException(
                status_code=422,
                detail="body needs 'user', 'message' and 'document' (interchange text)",
            )
        try:
            new = load_workbook(document)
        except DocumentError as e:
            raise _unprocessable(e)
        locked = state.commit_lock.acquire(blocking=False)
        if not locked:
            raise HTTPException(status_code=409, detail="another commit is in progress")
        try:
            if (new.version, new.revision) != (state.workbook.version, state.workbook.revision):
                raise HTTPException(
                    status_code=409,
                    detail=f"document is based on version {new.version} revision {new.revision}, "
                    f"current is {state.workbook.version}/{state.workbook.revision}",
                )
            try:
                updated, record = audit.commit(
                    state.log, state.workbook, new, user, datetime.now(), message,
                    archive=bool(body.get("archive", False)),
                )
            except audit.AuditError as e:
                raise _unprocessable(e)
            if config.workbook_path:
                Path(config.workbook_path).write_bytes(save_workbook(updated))
            state.reload(updated)
        finally:
            state.commit_lock.release()
        return {"version": record.version, "revision": record.revision, "seq": record.seq}

    @app.get("/api/export")
    def export(user: str = "") -> Response:
        if not user:
            raise HTTPException(status_code=422, detail="query parameter 'user' required")
        if state.log is not None:
            data, _ = audit.export_model(state.log, state.workbook, user, datetime.now())
        else:
            data = save_workbook(state.workbook)
        return Response(
            content=data,
            media_type="application/json",
            headers={"Content-Disposition": f'attachment; filename="{state.workbook.name}.nmd.json"'},
        )

    if config.static_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=config.static_dir, html=True), name="ui")

    return app


def serve(config: ServiceConfig, host: str = "127.0.0.1", port: int = 8000) -> None:
    """Load the model and log, then run the server. Unreadable files fail
    startup with a message."""
    import uvicorn

    path = Path(config.workbook_path)
    if not path.exists():
        raise SystemExit(f"error: workbook not found: {path}")
    try:
        workbook = load_workbook(path.read_bytes())
    except DocumentError as e:
        raise SystemExit(f"error: cannot load {path}: {e}")
    if config.static_dir and not Path(config.static_dir).is_dir():
        raise SystemExit(f"error: static directory not found: {config.static_dir}")
    log = audit.AuditLog.load(config.log_path) if config.log_path else None
    app = create_app(workbook, log, config)
    uvicorn.run(app, host=host, port=port, log_level="warning")
