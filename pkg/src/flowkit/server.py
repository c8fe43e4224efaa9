"""HTTP + websocket facade over the analyses and the runtime.

Stateless validation (the editor owns the document); live sessions are the
only server-side state. Every response body reuses the same serializers as
the CLI, so API output and CLI output never drift apart.
"""

from __future__ import annotations

import threading
import time
import uuid
from typing import Any, Optional

from fastapi import FastAPI, HTTPException, Query, WebSocket, WebSocketDisconnect
from fastapi.responses import JSONResponse

from . import runtime
from .analysis import analyze_flow, validate_payload
from .library import builtin_specs
from .model import FlowError, SpecRegistry, flow_from_json, spec_to_json


class SessionRun:
    """One live session: a worker thread appends records; readers poll snapshots."""

    def __init__(self, session: runtime.Session, pace_ms: int = 0):
        self.session = session
        self.pace = pace_ms / 1000.0
        self.records: list[runtime.ProvRecord] = []
        self.done = False
        self.stopped = False
        self._lock = threading.Lock()
        self._thread = threading.Thread(target=self._drive, daemon=True)

    def start(self) -> None:
        self._thread.start()

    def _drive(self) -> None:
        for record in self.session.run_iter():
            with self._lock:
                if self.stopped:
                    break
                self.records.append(record)
            if self.pace:
                time.sleep(self.pace)
        with self._lock:
            self.done = True

    def stop(self) -> None:
        with self._lock:
            self.stopped = True
            self.done = True

    def snapshot(self, start: int = 0) -> tuple[list[runtime.ProvRecord], bool]:
        with self._lock:
            return self.records[start:], self.done

    def wait(self, timeout: float = 10.0) -> None:
        self._thread.join(timeout)


def create_app(registry: Optional[SpecRegistry] = None, ui_dir: Optional[str] = None) -> FastAPI:
    registry = registry or builtin_specs()
    app = FastAPI(title="flowkit dev server")
    sessions: dict[str, SessionRun] = {}

    def load_body_flow(body: Any):
        try:
            return flow_from_json(body, registry)
        except FlowError as e:
            raise HTTPException(
                status_code=422,
                detail={"code": e.code, "location": e.location, "message": str(e)},
            ) from None

    @app.get("/api/health")
    def health() -> dict:
        return {"ok": True}

    @app.get("/api/nodespecs")
    def nodespecs() -> dict:
        return {"specs": [spec_to_json(s) for s in registry.specs()]}

    @app.post("/api/flows/validate")
    def validate(body: dict) -> JSONResponse:
        flow = load_body_flow(body)
        report = analyze_flow(flow, registry)
        return JSONResponse(validate_payload(report))

    @app.post("/api/sessions")
    def create_session(body: dict) -> dict:
        flow = load_body_flow(body.get("flow"))
        seed = int(body.get("seed", 0))
        duration = int(body.get("duration", 0))
        profiles = {str(k): str(v) for k, v in (body.get("profiles") or {}).items()}
        pace_ms = int(body.get("pace_ms", 0))
        try:
            session = runtime.Session(flow, registry, seed, duration, profiles)
        except runtime.RefusedToRun as e:
            raise HTTPException(status_code=409, detail=str(e)) from None
        run = SessionRun(session, pace_ms)
        session_id = uuid.uuid4().hex
        sessions[session_id] = run
        run.start()
        return {"id": session_id}

    def get_run(session_id: str) -> SessionRun:
        run = sessions.get(session_id)
        if run is None:
            raise HTTPException(status_code=404, detail="unknown session")
        return run

    @app.post("/api/sessions/{session_id}/stop")
    def stop_session(session_id: str) -> dict:
        run = get_run(session_id)
        run.stop()
        records, _ = run.snapshot()
        return {"stopped": True, "records": len(records)}

    @app.get("/api/sessions/{session_id}/provenance")
    def provenance(
        session_id: str,
        node: Optional[str] = Query(default=None),
        t_from: int = Query(default=0, alias="from"),
        t_to: Optional[int] = Query(default=None, alias="to"),
    ) -> JSONResponse:
        run = get_run(session_id)
        records, done = run.snapshot()
        if node is None:
            return JSONResponse({"done": done, "records": [r.to_json() for r in records]})
        hi = t_to if t_to is not None else max((r.t for r in records), default=0)
        try:
            rows = runtime.window(records, node, t_from, hi, known_nodes=run.session.result().nodes)
        except runtime.UnknownNode as e:
            raise HTTPException(status_code=404, detail=str(e)) from None
        except ValueError as e:
            raise HTTPException(status_code=422, detail=str(e)) from None
        return JSONResponse({"done": done, "records": [r.to_json() for r in rows]})

    @app.get("/api/sessions/{session_id}/lineage")
    def lineage(session_id: str, message: int) -> JSONResponse:
        run = get_run(session_id)
        records, _ = run.snapshot()
        try:
            tree = runtime.lineage(records, message)
        except runtime.UnknownMessage as e:
            raise HTTPException(status_code=404, detail=str(e)) from None
        return JSONResponse(tree.to_json())

    @app.websocket("/api/sessions/{session_id}/stream")
    async def stream(websocket: WebSocket, session_id: str) -> None:
        import asyncio

        await websocket.accept()
        run = sessions.get(session_id)
        if run is None:
            await websocket.close(code=4404)
            return
        cursor = 0
        try:
            while True:
                fresh, done = run.snapshot(cursor)
                for record in fresh:
                    await websocket.send_text(runtime.record_line(record))
                cursor += len(fresh)
                if done and not fresh:
                    break
                if not fresh:
                    await asyncio.sleep(0.01)
            await websocket.close()
        except WebSocketDisconnect:  # pragma: no cover
            pass

    if ui_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="editor")

    return app
