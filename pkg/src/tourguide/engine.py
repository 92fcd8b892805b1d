"""Session execution over a compiled flow graph.

A turn works like this: the user utterance runs through the understanding
bundle, the current state's transitions are tried in row order, and the
first condition that evaluates true fires. Its actions run (collecting
profile slots, showing images, asking the language model, recommending
routes), the session moves to the transition's next state, that state's
entry actions run, and its utterance template is rendered. Entering a
state with no outgoing transitions closes the dialogue with a final End
event — a turn can never fall through, because compilation guarantees a
trailing default transition everywhere else.

Sessions are mutable and confined to one caller at a time; the graph,
resources, and catalog they share are immutable.
"""

from __future__ import annotations

import time
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Callable, Iterator, NamedTuple

from . import actions as act
from .conditions import And, Call, ConditionExpr, Default, Not, Or
from .events import End, Event, Filler, RouteCards, ShowImageEvent, TurnOutput, Utterance
from .flow import FlowGraph, validate_graph
from .llm import LlmGateway
from .nlu import NluResources, UnderstandingResult, understand
from .routes import RouteCatalog, TouristRoute, recommend_routes
from .templates import render_template

ROUTE_SLOT_KEYS = ("route1", "route2")


class SessionEndedError(RuntimeError):
    pass


class InvalidGraphError(ValueError):
    def __init__(self, diagnostics):
        self.diagnostics = diagnostics
        super().__init__(
            "graph failed validation: " + "; ".join(str(d) for d in diagnostics))


class SchemaError(ValueError):
    pass


class HistoryEntry(NamedTuple):
    speaker: str  # "user" | "system"
    text: str
    timestamp: float


@dataclass
class Session:
    session_id: str
    graph: FlowGraph = field(repr=False)
    current_state: str = ""
    profile: dict[str, str] = field(default_factory=dict)
    history: list[HistoryEntry] = field(default_factory=list)
    turn_count: int = 0
    ended: bool = False
    created_at: float = 0.0
    updated_at: float = 0.0

    @property
    def phase(self) -> str:
        return self.graph.states[self.current_state].phase


class SessionView:
    """Read-only lookup over a session for templates and prompt building.

    Template keys: "profile.<slot>", "route1.<field>", "route2.<field>"
    where route fields are name, transport, description, spot1, spot2.
    """

    def __init__(self, session: Session, catalog: RouteCatalog | None):
        self.session = session
        self.catalog = catalog

    def get(self, key: str) -> str | None:
        scope, _, rest = key.partition(".")
        if scope == "profile" and rest:
            return self.session.profile.get(rest)
        if scope in ROUTE_SLOT_KEYS and rest:
            route = self._route(scope)
            if route is None:
                return None
            return {
                "name": route.name,
                "transport": route.transport,
                "description": route.description,
                "spot1": route.spots[0],
                "spot2": route.spots[1],
            }.get(rest)
        return None

    def _route(self, slot: str) -> TouristRoute | None:
        route_id = self.session.profile.get(slot)
        if route_id is None or self.catalog is None:
            return None
        return self.catalog.get(route_id)

    def history_turns(self) -> list[tuple[str, str]]:
        return [(entry.speaker, entry.text) for entry in self.session.history]

    def selected_routes(self) -> tuple[TouristRoute, TouristRoute] | None:
        first = self._route("route1")
        second = self._route("route2")
        if first is None or second is None:
            return None
        return first, second


def evaluate_condition(expr: ConditionExpr, u: UnderstandingResult,
                       session: Session) -> bool:
    """Evaluate a transition condition against one understanding result."""
    if isinstance(expr, Default):
        return True
    if isinstance(expr, Or):
        return any(evaluate_condition(c, u, session) for c in expr.children)
    if isinstance(expr, And):
        return all(evaluate_condition(c, u, session) for c in expr.children)
    if isinstance(expr, Not):
        return not evaluate_condition(expr.child, u, session)
    if isinstance(expr, Call):
        return _evaluate_call(expr, u, session)
    raise TypeError(f"not a condition expression: {expr!r}")


def _evaluate_call(call: Call, u: UnderstandingResult, session: Session) -> bool:
    if call.func == "keyword":
        return call.args[0] in u.matched_keyword_sets
    if call.func == "label":
        return call.args[0] in u.matched_labels
    if call.func == "sentiment":
        return u.sentiment.polarity == call.args[0]
    if call.func == "example":
        if u.example is None or u.example.intent_id != call.args[0]:
            return False
        if len(call.args) == 2:
            return u.example.similarity >= float(call.args[1])
        return True
    if call.func == "profile":
        key = call.args[0]
        if key not in session.profile:
            return False
        if len(call.args) == 2:
            return session.profile[key] == call.args[1]
        return True
    if call.func == "is_question":
        return u.is_question
    raise TypeError(f"unknown predicate: {call.func}")


def select_topic(session: Session, candidate_topics: list[str]) -> str:
    """First candidate whose profile slot is still unset; else revisit the first."""
    if not candidate_topics:
        raise ValueError("candidate_topics must be non-empty")
    for topic in candidate_topics:
        if topic not in session.profile:
            return topic
    return candidate_topics[0]


class DialogueEngine:
    """Executes sessions over one validated graph and resource bundle."""

    def __init__(
        self,
        graph: FlowGraph,
        resources: NluResources,
        catalog: RouteCatalog | None = None,
        gateway: LlmGateway | None = None,
        clock: Callable[[], float] = time.time,
        id_factory: Callable[[], str] | None = None,
    ):
        diagnostics = validate_graph(graph)
        if diagnostics:
            raise InvalidGraphError(diagnostics)
        self.graph = graph
        self.resources = resources
        self.catalog = catalog
        self.gateway = gateway or LlmGateway()
        self.clock = clock
        self.id_factory = id_factory or (lambda: uuid.uuid4().hex)

    # -- session lifecycle -------------------------------------------------

    def create_session(self) -> tuple[Session, TurnOutput]:
        now = self.clock()
        session = Session(
            session_id=self.id_factory(),
            graph=self.graph,
            current_state=self.graph.initial_state,
            created_at=now,
            updated_at=now,
        )
        output = TurnOutput()
        spoken: list[str] = []
        output.events.extend(self._enter_state(
            session, self.graph.initial_state, False, spoken))
        session.history.append(HistoryEntry("system", "\n".join(spoken), self.clock()))
        session.updated_at = self.clock()
        return session, output

    def step(self, session: Session, user_text: str) -> TurnOutput:
        output = TurnOutput()
        output.events.extend(self.step_events(session, user_text, output.llm_exchanges))
        return output

    def step_events(self, session: Session, user_text: str,
                    exchange_sink: list | None = None) -> Iterator[Event]:
        """Run one turn, yielding events as they become deliverable.

        The filler event for a language-model turn is yielded before the
        transport call starts, so streaming consumers can flush it while
        the request is in flight.
        """
        if session.ended:
            raise SessionEndedError(f"session {session.session_id} has ended")
        u = understand(user_text, self.resources)
        node = self.graph.states[session.current_state]

        fired = None
        for transition in node.transitions:
            if evaluate_condition(transition.condition, u, session):
                fired = transition
                break
        # unreachable on a validated graph: a default row always matches
        assert fired is not None, f"no transition fired in state {node.state_id}"

        user_ts = self.clock()
        spoken: list[str] = []
        end_requested = False
        for action in fired.actions:
            if isinstance(action, act.EndDialogue):
                end_requested = True
                continue
            yield from self._run_action(session, action, u, spoken, exchange_sink)

        yield from self._enter_state(session, fired.next_state, end_requested, spoken)

        session.history.append(HistoryEntry("user", user_text, user_ts))
        session.history.append(HistoryEntry("system", "\n".join(spoken), self.clock()))
        session.turn_count += 1
        session.updated_at = self.clock()

    # -- internals ---------------------------------------------------------

    def _run_action(self, session: Session, action: act.Action,
                    u: UnderstandingResult | None, spoken: list[str],
                    exchange_sink: list | None) -> Iterator[Event]:
        if isinstance(action, act.SetSlot):
            if action.value == act.UTTERANCE_SENTINEL:
                session.profile[action.key] = u.raw_text if u else ""
            else:
                session.profile[action.key] = action.value
        elif isinstance(action, act.ShowImage):
            yield ShowImageEvent(action.image_id)
        elif isinstance(action, act.LlmAnswer):
            yield self.gateway.filler_event()
            question = u.raw_text if u else ""
            exchange = self.gateway.execute(question, SessionView(session, self.catalog))
            if exchange_sink is not None:
                exchange_sink.append(exchange)
            text = exchange.answer if exchange.ok else self.gateway.config.fallback_text
            spoken.append(text)
            yield Utterance(text)
        elif isinstance(action, act.RecommendRoutes):
            if self.catalog is None:
                raise RuntimeError("recommend_routes() needs a route catalog")
            first, second, reasons = recommend_routes(session.profile, self.catalog)
            session.profile["route1"] = first.route_id
            session.profile["route2"] = second.route_id
            yield RouteCards((first.route_id, second.route_id), tuple(reasons))
        else:
            raise TypeError(f"unhandled action: {action!r}")

    def _enter_state(self, session: Session, state_id: str, end_requested: bool,
                     spoken: list[str]) -> Iterator[Event]:
        node = self.graph.states[state_id]
        session.current_state = state_id
        for action in node.entry_actions:
            if isinstance(action, act.EndDialogue):
                end_requested = True
                continue
            yield from self._run_action(session, action, None, spoken, None)
        rendered = render_template(
            node.utterance_template, SessionView(session, self.catalog))
        spoken.append(rendered)
        yield Utterance(rendered)
        if end_requested or node.terminal:
            session.ended = True
            yield End()

    # -- snapshots -----------------------------------------------------------

    def snapshot_session(self, session: Session) -> dict:
        return {
            "session_id": session.session_id,
            "current_state": session.current_state,
            "phase": session.phase,
            "profile": dict(session.profile),
            "turn_count": session.turn_count,
            "ended": session.ended,
            "created_at": _to_iso(session.created_at),
            "updated_at": _to_iso(session.updated_at),
        }

    def restore_session(self, snapshot: dict) -> Session:
        """Rebuild a session from its snapshot.

        History is not part of the snapshot; a restored session resumes
        with an empty transcript but identical observable behavior.
        """
        required = {"session_id", "current_state", "profile", "turn_count", "ended"}
        missing = required - set(snapshot)
        if missing:
            raise SchemaError(f"snapshot missing keys: {sorted(missing)}")
        state = snapshot["current_state"]
        if state not in self.graph.states:
            raise SchemaError(f"snapshot names unknown state {state!r}")
        profile = snapshot["profile"]
        if not isinstance(profile, dict) or not all(
                isinstance(k, str) and isinstance(v, str) for k, v in profile.items()):
            raise SchemaError("snapshot profile must map strings to strings")
        if not isinstance(snapshot["turn_count"], int) or snapshot["turn_count"] < 0:
            raise SchemaError("snapshot turn_count must be a non-negative integer")
        if not isinstance(snapshot["ended"], bool):
            raise SchemaError("snapshot ended must be a boolean")
        return Session(
            session_id=snapshot["session_id"],
            graph=self.graph,
            current_state=state,
            profile=dict(profile),
            turn_count=snapshot["turn_count"],
            ended=snapshot["ended"],
            created_at=_from_iso(snapshot.get("created_at")),
            updated_at=_from_iso(snapshot.get("updated_at")),
        )


def _to_iso(ts: float) -> str:
    return datetime.fromtimestamp(ts, tz=timezone.utc).isoformat()


def _from_iso(value) -> float:
    if not value:
        return 0.0
    try:
        return datetime.fromisoformat(value).timestamp()
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"bad timestamp {value!r}") from exc
