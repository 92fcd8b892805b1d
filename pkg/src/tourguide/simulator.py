"""Batch-run scripted personas against a compiled flow.

A persona is a list of (state, reply) rules consumed in order — the first
unused rule matching the current state answers that state's question, and
the default reply covers everything else — so runs are fully deterministic
given (flow, resources, persona, stub answers, seed).

Each run produces a SimReport: the full transcript, visited states, a
speaking-time estimate, and whether the dialogue reached its End event
cleanly. A run never raises: engine failures are captured as a breakdown
note in the report so batch checks can count them (the target is zero).
"""

from __future__ import annotations

import itertools
import json
import random
from dataclasses import dataclass, field
from pathlib import Path

from .engine import DialogueEngine
from .events import Event, event_to_dict
from .flow import FlowGraph
from .llm import CannedTransport, LlmConfig, LlmGateway, LlmTransport
from .nlu import NluResources
from .routes import RouteCatalog

DEFAULT_TURN_CAP = 100
TEN_MINUTE_BUDGET_S = 600.0

# offline stand-in answers for language-model turns during simulation
CANNED_ANSWERS = (
    "はい、ご安心ください。どちらのルートも半日ほどで無理なく回れます。",
    "移動はおおよそ30分ほどです。",
    "週末は少し混み合いますので、午前中の出発がおすすめです。",
    "はい、お子さま連れでも楽しめる見どころが揃っています。",
)


@dataclass(frozen=True)
class ScriptRule:
    match: str  # state id, or "*" for any state
    reply: str


@dataclass(frozen=True)
class Persona:
    persona_id: str
    script: tuple[ScriptRule, ...]
    default_reply: str

    @staticmethod
    def from_dict(payload: dict) -> "Persona":
        rules = tuple(
            ScriptRule(rule["match"], rule["reply"])
            for rule in payload.get("script", [])
        )
        return Persona(
            persona_id=payload["persona_id"],
            script=rules,
            default_reply=payload.get("default_reply", ""),
        )


def load_persona(path: str | Path) -> Persona:
    with open(path, encoding="utf-8") as f:
        return Persona.from_dict(json.load(f))


def load_persona_pack(directory: str | Path) -> list[Persona]:
    return [load_persona(p) for p in sorted(Path(directory).glob("*.json"))]


@dataclass(frozen=True)
class SpeechRates:
    system_cps: float = 8.0
    user_cps: float = 8.0
    per_turn_latency_s: float = 1.5

    def __post_init__(self):
        if self.system_cps <= 0 or self.user_cps <= 0:
            raise ValueError("speaking rates must be positive")


DEFAULT_RATES = SpeechRates()


@dataclass
class TranscriptTurn:
    state: str
    user_text: str | None
    events: list[dict]


@dataclass
class SimReport:
    persona_id: str
    transcript: list[TranscriptTurn]
    turns: int
    estimated_duration_s: float
    visited_states: list[str]
    ended_cleanly: bool
    breakdown: str | None = None

    def as_dict(self) -> dict:
        return {
            "persona_id": self.persona_id,
            "turns": self.turns,
            "estimated_duration_s": self.estimated_duration_s,
            "visited_states": self.visited_states,
            "ended_cleanly": self.ended_cleanly,
            "breakdown": self.breakdown,
            "transcript": [
                {"state": t.state, "user_text": t.user_text, "events": t.events}
                for t in self.transcript
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), ensure_ascii=False, sort_keys=True, indent=2)


class _ScriptCursor:
    """Consumes persona rules: first unused rule matching the state wins."""

    def __init__(self, persona: Persona):
        self.persona = persona
        self.used = [False] * len(persona.script)

    def reply_for(self, state_id: str) -> str:
        for i, rule in enumerate(self.persona.script):
            if self.used[i]:
                continue
            if rule.match == "*" or rule.match == state_id:
                self.used[i] = True
                return rule.reply
        return self.persona.default_reply


def run_persona(
    graph: FlowGraph,
    resources: NluResources,
    persona: Persona,
    catalog: RouteCatalog | None = None,
    llm_stub: LlmTransport | None = None,
    rates: SpeechRates = DEFAULT_RATES,
    turn_cap: int = DEFAULT_TURN_CAP,
    seed: int = 0,
) -> SimReport:
    """Drive one persona from session start to End (or the turn cap)."""
    rng = random.Random(seed)
    transport = llm_stub if llm_stub is not None else CannedTransport(CANNED_ANSWERS, rng)
    counter = itertools.count()
    engine = DialogueEngine(
        graph,
        resources,
        catalog=catalog,
        gateway=LlmGateway(LlmConfig(), transport),
        clock=lambda: float(next(counter)),
        id_factory=lambda: f"sim-{persona.persona_id}-{seed}",
    )

    transcript: list[TranscriptTurn] = []
    visited: list[str] = []
    cursor = _ScriptCursor(persona)
    breakdown: str | None = None
    ended_cleanly = False

    try:
        session, output = engine.create_session()
        transcript.append(TranscriptTurn(
            graph.initial_state, None, _serialize(output.events, catalog)))
        visited.append(session.current_state)

        for _ in range(turn_cap):
            if session.ended:
                break
            reply = cursor.reply_for(session.current_state)
            asked_state = session.current_state
            output = engine.step(session, reply)
            transcript.append(TranscriptTurn(
                asked_state, reply, _serialize(output.events, catalog)))
            if session.current_state not in visited:
                visited.append(session.current_state)
        ended_cleanly = (
            session.ended
            and bool(transcript[-1].events)
            and transcript[-1].events[-1]["type"] == "end"
        )
    except Exception as exc:  # a persona run must always produce a report
        breakdown = f"{type(exc).__name__}: {exc}"
        ended_cleanly = False

    return SimReport(
        persona_id=persona.persona_id,
        transcript=transcript,
        turns=sum(1 for t in transcript if t.user_text is not None),
        estimated_duration_s=estimate_duration(transcript, rates),
        visited_states=sorted(set(visited)),
        ended_cleanly=ended_cleanly,
        breakdown=breakdown,
    )


def _serialize(events: list[Event], catalog: RouteCatalog | None) -> list[dict]:
    return [event_to_dict(e, catalog) for e in events]


def estimate_duration(transcript: list[TranscriptTurn], rates: SpeechRates) -> float:
    """Speaking-time estimate: per turn, spoken chars at the configured
    chars-per-second rates plus a fixed turn-handling latency."""
    total = 0.0
    for turn in transcript:
        system_chars = sum(
            len(e.get("text", "")) for e in turn.events if e["type"] in ("utterance", "filler")
        )
        user_chars = len(turn.user_text or "")
        total += (
            system_chars / rates.system_cps
            + user_chars / rates.user_cps
            + rates.per_turn_latency_s
        )
    return total


def longest_path_duration(
    graph: FlowGraph,
    rates: SpeechRates = DEFAULT_RATES,
    assumed_user_reply_chars: int = 10,
) -> float:
    """Worst-case duration over all simple paths from the initial state.

    Exhaustive DFS without state revisits (loops are escapable by design,
    so a non-repeating pass bounds the scripted conversation). Uses raw
    template lengths and a nominal user reply length per turn.
    """
    def state_cost(state_id: str) -> float:
        return len(graph.states[state_id].utterance_template) / rates.system_cps

    turn_cost = assumed_user_reply_chars / rates.user_cps + rates.per_turn_latency_s
    best = 0.0
    initial = graph.initial_state
    stack = [(initial, frozenset([initial]),
              state_cost(initial) + rates.per_turn_latency_s)]
    while stack:
        state_id, seen, cost = stack.pop()
        best = max(best, cost)
        for transition in graph.states[state_id].transitions:
            nxt = transition.next_state
            if nxt in seen:
                continue
            stack.append((nxt, seen | {nxt}, cost + state_cost(nxt) + turn_cost))
    return best


@dataclass
class CoverageReport:
    state_coverage: float
    uncovered: list[str]

    def as_dict(self) -> dict:
        return {"state_coverage": self.state_coverage, "uncovered": self.uncovered}


def coverage_report(reports: list[SimReport], graph: FlowGraph) -> CoverageReport:
    visited: set[str] = set()
    for report in reports:
        visited.update(report.visited_states)
    all_states = set(graph.states)
    covered = visited & all_states
    coverage = len(covered) / len(all_states) if all_states else 0.0
    return CoverageReport(coverage, sorted(all_states - covered))
