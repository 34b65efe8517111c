"""HTTP/JSON service wrapping sessions for the operator loop.

One JSON snapshot file per session, written atomically (temp file plus
rename), so a crash between receiving a measurement and persisting it
loses the observation entirely rather than half-applying it.  Requests to
one session are serialized; distinct sessions proceed in parallel.  All
payloads and responses carry physical units only.
"""

from __future__ import annotations

import json
import os
import threading
import time
import uuid
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from .session import (
    InvalidObservationError,
    OutOfBoxError,
    PhaseError,
    Session,
    SessionConfig,
)
from .tasks import TaskDataset, load_task

__all__ = ["SessionStore", "create_app"]


class SessionStore:
    """Disk-backed registry of sessions with per-session locking."""

    def __init__(self, data_dir):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()
        self._sessions: dict[str, dict] = {}
        self._locks: dict[str, threading.Lock] = {}

    def _path(self, session_id: str) -> Path:
        return self.data_dir / f"{session_id}.json"

    def lock_for(self, session_id: str) -> threading.Lock:
        with self._lock:
            return self._locks.setdefault(session_id, threading.Lock())

    def create(self, session: Session, param_names: list[str]) -> str:
        session_id = uuid.uuid4().hex
        now = time.time()
        entry = {
            "session": session,
            "param_names": param_names,
            "created_at": now,
            "updated_at": now,
        }
        self._persist(session_id, entry)
        with self._lock:
            self._sessions[session_id] = entry
        return session_id

    def get(self, session_id: str) -> dict | None:
        with self._lock:
            entry = self._sessions.get(session_id)
        if entry is not None:
            return entry
        path = self._path(session_id)
        if not path.is_file():
            return None
        doc = json.loads(path.read_text(encoding="utf-8"))
        entry = {
            "session": Session.from_dict(doc["session"]),
            "param_names": doc["param_names"],
            "created_at": doc["created_at"],
            "updated_at": doc["updated_at"],
        }
        with self._lock:
            entry = self._sessions.setdefault(session_id, entry)
        return entry

    def ids(self) -> list[str]:
        with self._lock:
            known = set(self._sessions)
        on_disk = {p.stem for p in self.data_dir.glob("*.json")}
        return sorted(known | on_disk)

    def commit(self, session_id: str, session: Session, param_names: list[str],
               created_at: float) -> dict:
        """Persist a fully updated session, then swap it in atomically."""
        entry = {
            "session": session,
            "param_names": param_names,
            "created_at": created_at,
            "updated_at": time.time(),
        }
        self._persist(session_id, entry)
        with self._lock:
            self._sessions[session_id] = entry
        return entry

    def _persist(self, session_id: str, entry: dict) -> None:
        doc = {
            "session_id": session_id,
            "param_names": entry["param_names"],
            "created_at": entry["created_at"],
            "updated_at": entry["updated_at"],
            "session": entry["session"].to_dict(),
        }
        path = self._path(session_id)
        tmp = path.with_suffix(".json.tmp")
        tmp.write_text(json.dumps(doc), encoding="utf-8")
        os.replace(tmp, path)


class TellBody(BaseModel):
    x: list[float]
    y: float | None = None
    failure: bool = False


class CreateBody(BaseModel):
    sources: list = Field(default_factory=list)
    config: dict = Field(default_factory=dict)


def _load_source(entry) -> TaskDataset:
    if isinstance(entry, dict) and "path" in entry:
        return load_task(entry["path"])
    if isinstance(entry, dict):
        return TaskDataset.from_dict(entry)
    raise ValueError("each source must be a task document or a {'path': ...} reference")


def _best_payload(session: Session):
    best = session.best_so_far()
    if best is None:
        return None
    return {"x": best[0].tolist(), "y": best[1]}


def _named(values, names):
    return {name: float(v) for name, v in zip(names, values)}


def create_app(data_dir, static_dir=None) -> FastAPI:
    """Build the service; ``static_dir`` optionally serves the web console."""
    app = FastAPI(title="tlbo service")
    store = SessionStore(data_dir)
    app.state.store = store

    @app.exception_handler(RequestValidationError)
    async def malformed_payload(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"detail": exc.errors()})

    def error(status: int, message: str) -> JSONResponse:
        return JSONResponse(status_code=status, content={"detail": message})

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    @app.get("/sessions")
    def list_sessions():
        items = []
        for session_id in store.ids():
            entry = store.get(session_id)
            if entry is None:
                continue
            items.append(
                {
                    "session_id": session_id,
                    "phase": entry["session"].phase,
                    "n_observations": entry["session"].n_observations,
                    "created_at": entry["created_at"],
                    "updated_at": entry["updated_at"],
                }
            )
        return {"sessions": items}

    @app.post("/sessions", status_code=201)
    def create_session(body: CreateBody):
        try:
            sources = [_load_source(e) for e in body.sources]
            config_doc = dict(body.config)
            param_names = config_doc.pop("param_names", None)
            if "box" not in config_doc:
                raise ValueError("config.box is required")
            config = SessionConfig.from_dict(config_doc)
            session = Session.create(sources, config)
        except (ValueError, KeyError, TypeError, FileNotFoundError) as exc:
            return error(422, str(exc))
        if param_names is None:
            param_names = [f"x{i + 1}" for i in range(config.box.n_dims)]
        session_id = store.create(session, list(param_names))
        return {"session_id": session_id, "phase": session.phase}

    @app.post("/sessions/{session_id}/ask")
    def ask(session_id: str):
        entry = store.get(session_id)
        if entry is None:
            return error(404, "unknown session")
        with store.lock_for(session_id):
            session: Session = entry["session"]
            names = entry["param_names"]
            phase = session.phase
            if phase in ("await_init_1", "await_init_2"):
                x = session.suggest_start()
                return {
                    "x_next": x.tolist(),
                    "params": _named(x, names),
                    "weights": None,
                    "losses": None,
                    "iteration": session.iteration,
                    "suggested_start": True,
                    "surrogate_value": None,
                    "phase": phase,
                }
            if phase == "stopped":
                return error(409, "session is stopped")
            x, diag = session.ask()
            return {
                "x_next": x.tolist(),
                "params": _named(x, names),
                "weights": diag["weights"],
                "losses": diag["losses"],
                "iteration": diag["iteration"],
                "suggested_start": False,
                "surrogate_value": diag["surrogate_value"],
                "phase": phase,
            }

    @app.post("/sessions/{session_id}/tell")
    def tell(session_id: str, body: TellBody):
        entry = store.get(session_id)
        if entry is None:
            return error(404, "unknown session")
        with store.lock_for(session_id):
            session: Session = entry["session"]
            # apply to a restored copy, persist, then swap: a crash in
            # between leaves the previous snapshot untouched
            updated = Session.from_dict(session.to_dict())
            updated._last_ask = session._last_ask
            try:
                updated.tell(np.asarray(body.x), body.y, failure=body.failure)
            except OutOfBoxError as exc:
                return error(409, str(exc))
            except InvalidObservationError as exc:
                return error(400, str(exc))
            except PhaseError as exc:
                return error(409, str(exc))
            entry = store.commit(
                session_id, updated, entry["param_names"], entry["created_at"]
            )
            return {
                "phase": updated.phase,
                "n_observations": updated.n_observations,
                "best_so_far": _best_payload(updated),
            }

    @app.get("/sessions/{session_id}/history")
    def history(session_id: str):
        entry = store.get(session_id)
        if entry is None:
            return error(404, "unknown session")
        with store.lock_for(session_id):
            session: Session = entry["session"]
            records = [dict(r) for r in session.history]
            weights_trace = [r["weights"] for r in records if r.get("weights")]
            return {
                "records": records,
                "weights_trace": weights_trace,
                "best_so_far": _best_payload(session),
                "phase": session.phase,
                "iteration": session.iteration,
                "n_observations": session.n_observations,
                "param_names": entry["param_names"],
                "box": session.config.box.to_dict(),
            }

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=static_dir, html=True), name="ui")

    return app
