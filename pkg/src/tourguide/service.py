"""HTTP session service: REST turns plus a server-push event stream.

Endpoints::

    POST /v1/sessions                        -> 201 {"session_id", "events"}
    POST /v1/sessions/{id}/utterances        -> 200 {"events"}   body: {"text": "..."}
    GET  /v1/sessions/{id}                   -> snapshot JSON
    GET  /v1/sessions/{id}/events?after=N    -> text/event-stream

Events carry a per-session strictly-increasing "seq". Turns are executed
while holding a per-session lock (concurrent posts queue by default, or
are rejected 409 under the "busy" policy), and each produced event is
published to the stream as soon as the engine yields it — so the filler
for a language-model turn reaches subscribers while the model call is
still in flight.

Sessions persist as snapshots plus append-only turn logs; an unknown
session id is transparently restored from the store before 404ing.
"""

from __future__ import annotations

import json
import logging
import threading
from dataclasses import dataclass, field

from fastapi import Body, FastAPI, HTTPException, Request
from fastapi.responses import JSONResponse, StreamingResponse

from .config import AppConfig
from .engine import DialogueEngine, SchemaError, Session, SessionEndedError
from .events import event_to_dict
from .flow import Diagnostic, parse_flow_sheet
from .llm import (
    CannedTransport,
    HttpChatTransport,
    LlmFilteredError,
    LlmGateway,
    LlmHttpError,
    LlmTimeoutError,
    LlmTransport,
    NullTransport,
    ScriptedTransport,
)
from .resources import load_resources
from .routes import load_catalog
from .simulator import CANNED_ANSWERS
from .store import FileSessionStore, SessionStore

logger = logging.getLogger(__name__)


class BusyError(RuntimeError):
    pass


@dataclass
class ManagedSession:
    session: Session
    lock: threading.Lock = field(default_factory=threading.Lock)
    cond: threading.Condition = field(default_factory=threading.Condition)
    events: list[dict] = field(default_factory=list)
    seq: int = 0


class SessionService:
    """Session registry + turn execution + persistence."""

    def __init__(self, engine: DialogueEngine, store: SessionStore,
                 queue_policy: str = "queue"):
        self.engine = engine
        self.store = store
        self.queue_policy = queue_policy
        self._sessions: dict[str, ManagedSession] = {}
        self._registry_lock = threading.Lock()

    def create(self) -> tuple[str, list[dict]]:
        session, output = self.engine.create_session()
        managed = ManagedSession(session=session)
        events = []
        with managed.cond:
            for event in output.events:
                managed.seq += 1
                payload = event_to_dict(event, self.engine.catalog, seq=managed.seq)
                managed.events.append(payload)
                events.append(payload)
            managed.cond.notify_all()
        with self._registry_lock:
            self._sessions[session.session_id] = managed
        self.store.append_turn(session.session_id, {
            "turn_no": 0, "user_text": None, "events": events, "llm": []})
        self.store.save_snapshot(self.engine.snapshot_session(session))
        return session.session_id, events

    def get(self, session_id: str) -> ManagedSession | None:
        with self._registry_lock:
            managed = self._sessions.get(session_id)
        if managed is not None:
            return managed
        return self._restore(session_id)

    def _restore(self, session_id: str) -> ManagedSession | None:
        snapshot = self.store.load_snapshot(session_id)
        if snapshot is None:
            return None
        session = self.engine.restore_session(snapshot)
        managed = ManagedSession(session=session)
        for record in self.store.read_turns(session_id):
            managed.events.extend(record.get("events", []))
        managed.seq = max((e.get("seq", 0) for e in managed.events), default=0)
        with self._registry_lock:
            return self._sessions.setdefault(session_id, managed)

    def run_turn(self, session_id: str, text: str) -> list[dict]:
        managed = self.get(session_id)
        if managed is None:
            raise KeyError(session_id)
        blocking = self.queue_policy == "queue"
        if not managed.lock.acquire(blocking=blocking):
            raise BusyError(session_id)
        try:
            if managed.session.ended:
                raise SessionEndedError(session_id)
            exchanges: list = []
            turn_events: list[dict] = []
            for event in self.engine.step_events(managed.session, text, exchanges):
                with managed.cond:
                    managed.seq += 1
                    payload = event_to_dict(event, self.engine.catalog, seq=managed.seq)
                    managed.events.append(payload)
                    turn_events.append(payload)
                    managed.cond.notify_all()
            self.store.append_turn(session_id, {
                "turn_no": managed.session.turn_count,
                "user_text": text,
                "events": turn_events,
                "llm": [{"outcome": x.outcome, "answer": x.answer} for x in exchanges],
            })
            self.store.save_snapshot(self.engine.snapshot_session(managed.session))
            return turn_events
        finally:
            managed.lock.release()

    def snapshot(self, session_id: str) -> dict:
        managed = self.get(session_id)
        if managed is None:
            raise KeyError(session_id)
        return self.engine.snapshot_session(managed.session)

    def stream_events(self, session_id: str, after: int, heartbeat_s: float):
        # session lookup happens eagerly so missing ids 404 before streaming
        managed = self.get(session_id)
        if managed is None:
            raise KeyError(session_id)
        return self._stream(managed, after, heartbeat_s)

    def _stream(self, managed: ManagedSession, after: int, heartbeat_s: float):
        last = after
        while True:
            with managed.cond:
                pending = [e for e in managed.events if e["seq"] > last]
                if not pending:
                    if managed.session.ended:
                        return
                    managed.cond.wait(timeout=heartbeat_s)
                    pending = [e for e in managed.events if e["seq"] > last]
            if pending:
                for payload in pending:
                    last = payload["seq"]
                    yield f"data: {json.dumps(payload, ensure_ascii=False)}\n\n"
            else:
                yield ": ping\n\n"


@dataclass
class Runtime:
    service: SessionService | None
    settings_heartbeat_s: float
    boot_diagnostics: list[Diagnostic] = field(default_factory=list)


def make_transport(config: AppConfig) -> LlmTransport:
    if config.llm_mode == "http":
        return HttpChatTransport()
    if config.llm_mode == "stub":
        import random

        return CannedTransport(CANNED_ANSWERS, random.Random(0))
    return NullTransport()


def build_runtime(config: AppConfig, transport: LlmTransport | None = None,
                  store: SessionStore | None = None) -> Runtime:
    """Load flow/resources and assemble the service; diagnostics instead
    of an engine when the flow does not validate (the app then serves 503)."""
    with open(config.flow_path, encoding="utf-8") as f:
        compiled = parse_flow_sheet(f.read())
    if compiled.graph is None:
        return Runtime(None, config.service.sse_heartbeat_s, compiled.diagnostics)
    resources = load_resources(config.resources_dir, config.example_threshold)
    catalog = load_catalog(config.routes_path)
    gateway = LlmGateway(config.llm, transport or make_transport(config))
    engine = DialogueEngine(compiled.graph, resources, catalog=catalog, gateway=gateway)
    service = SessionService(
        engine,
        store or FileSessionStore(config.service.store_dir),
        queue_policy=config.service.queue_policy,
    )
    return Runtime(service, config.service.sse_heartbeat_s)


def create_app(runtime: Runtime) -> FastAPI:
    app = FastAPI(title="tourguide session service")
    app.state.runtime = runtime

    def service_or_503(request: Request) -> SessionService:
        rt: Runtime = request.app.state.runtime
        if rt.service is None:
            raise HTTPException(status_code=503, detail={
                "error": "flow failed validation",
                "diagnostics": [str(d) for d in rt.boot_diagnostics],
            })
        return rt.service

    @app.post("/v1/sessions", status_code=201)
    def create_session(request: Request):
        service = service_or_503(request)
        session_id, events = service.create()
        return {"session_id": session_id, "events": events}

    @app.post("/v1/sessions/{session_id}/utterances")
    def post_utterance(session_id: str, request: Request, payload: dict = Body(...)):
        service = service_or_503(request)
        text = payload.get("text")
        if not isinstance(text, str):
            raise HTTPException(status_code=400, detail="body must carry a string 'text'")
        try:
            events = service.run_turn(session_id, text)
        except KeyError:
            raise HTTPException(status_code=404, detail="unknown session")
        except SessionEndedError:
            raise HTTPException(status_code=409, detail="session has ended")
        except BusyError:
            raise HTTPException(status_code=409, detail="turn already in flight")
        return {"events": events}

    @app.get("/v1/sessions/{session_id}")
    def get_snapshot(session_id: str, request: Request):
        service = service_or_503(request)
        try:
            return service.snapshot(session_id)
        except KeyError:
            raise HTTPException(status_code=404, detail="unknown session")

    @app.get("/v1/sessions/{session_id}/events")
    def get_events(session_id: str, request: Request, after: int = 0):
        service = service_or_503(request)
        rt: Runtime = request.app.state.runtime
        try:
            stream = service.stream_events(session_id, after, rt.settings_heartbeat_s)
        except KeyError:
            raise HTTPException(status_code=404, detail="unknown session")
        return StreamingResponse(stream, media_type="text/event-stream", headers={
            "Cache-Control": "no-cache",
            "X-Accel-Buffering": "no",
        })

    @app.exception_handler(SchemaError)
    def schema_error(_request, exc):
        return JSONResponse(status_code=422, content={"detail": str(exc)})

    return app


def app_from_config(config: AppConfig, transport: LlmTransport | None = None,
                    store: SessionStore | None = None) -> FastAPI:
    return create_app(build_runtime(config, transport=transport, store=store))


# -- log replay ------------------------------------------------------------


def scripted_transport_from_log(turn_records: list[dict]) -> ScriptedTransport:
    """Rebuild the language-model script a recorded conversation saw."""
    script: list[str | Exception] = []
    for record in turn_records:
        for exchange in record.get("llm", []):
            outcome = exchange.get("outcome")
            if outcome == "ok":
                script.append(exchange.get("answer") or "")
            elif outcome == "timeout":
                script.append(LlmTimeoutError("replayed timeout"))
            elif outcome == "filtered":
                script.append(LlmFilteredError("replayed filter"))
            else:
                script.append(LlmHttpError("replayed http error"))
    return ScriptedTransport(script)


def replay_turn_log(engine: DialogueEngine, turn_records: list[dict]) -> list[dict]:
    """Re-run a recorded conversation through a fresh engine.

    The engine must be constructed with scripted_transport_from_log so
    model turns reproduce the recorded outcomes. Returns all events with
    seq assigned exactly like the live service.
    """
    session, output = engine.create_session()
    all_events: list[dict] = []
    seq = 0
    for event in output.events:
        seq += 1
        all_events.append(event_to_dict(event, engine.catalog, seq=seq))
    for record in turn_records:
        if record.get("user_text") is None:
            continue
        turn = engine.step(session, record["user_text"])
        for event in turn.events:
            seq += 1
            all_events.append(event_to_dict(event, engine.catalog, seq=seq))
    return all_events
