"""Compile tab-separated flow sheets into executable state graphs.

Sheet format (UTF-8, one table, "#" comment lines, blank lines ignored)::

    state <TAB> phase <TAB> utterance <TAB> condition <TAB> actions <TAB> next_state

Phases: ice_break, sightseeing, recommend. Row order is significant:
transition priority is row order, and the first declared state is the
graph's initial state.

Row kinds:

* condition row — non-empty condition cell; declares one transition
  (condition, actions, next_state). next_state must be non-empty.
* declaration row — empty condition cell; must be the state's first row.
  Its actions become entry actions, run every time the state is entered
  (this is how the opening quiz image and the terminal end() are wired).
  next_state must be empty.

The first row of each state carries the state's utterance template;
subsequent rows leave the utterance cell empty. A state with no condition
rows is terminal. Every non-terminal state needs a trailing ``default``
transition so a turn can never fall through.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .actions import Action, ActionSyntaxError, LlmAnswer, parse_actions
from .conditions import (
    ConditionError,
    ConditionExpr,
    Default,
    parse_condition,
)

PHASES = ("ice_break", "sightseeing", "recommend")

QUESTION_SUFFIXES = ("？", "?")


@dataclass(frozen=True)
class Diagnostic:
    rule: str
    state: str | None
    message: str
    line: int | None = None

    def __str__(self) -> str:
        where = f" [line {self.line}]" if self.line is not None else ""
        who = f" state={self.state}" if self.state else ""
        return f"{self.rule}:{who} {self.message}{where}"


class FlowError(ValueError):
    """Raised by load helpers when a sheet does not compile cleanly."""

    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = diagnostics
        lines = "\n".join(str(d) for d in diagnostics)
        super().__init__(f"{len(diagnostics)} flow diagnostic(s):\n{lines}")


@dataclass(frozen=True)
class SheetRow:
    state: str
    phase: str
    utterance: str
    condition: str
    actions: str
    next_state: str
    line: int


@dataclass(frozen=True)
class Transition:
    condition: ConditionExpr
    actions: tuple[Action, ...]
    next_state: str
    line: int | None = None


@dataclass(frozen=True)
class StateNode:
    state_id: str
    phase: str
    utterance_template: str
    entry_actions: tuple[Action, ...] = ()
    transitions: tuple[Transition, ...] = ()

    @property
    def terminal(self) -> bool:
        return not self.transitions


@dataclass(frozen=True)
class FlowGraph:
    states: dict[str, StateNode]
    initial_state: str

    @property
    def terminal_states(self) -> frozenset[str]:
        return frozenset(s for s, node in self.states.items() if node.terminal)


@dataclass
class CompileResult:
    graph: FlowGraph | None
    diagnostics: list[Diagnostic] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.graph is not None and not self.diagnostics


def read_sheet(sheet_text: str) -> tuple[list[SheetRow], list[Diagnostic]]:
    """Split sheet text into rows; malformed lines become diagnostics."""
    rows: list[SheetRow] = []
    diagnostics: list[Diagnostic] = []
    for lineno, raw in enumerate(sheet_text.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        cells = raw.split("\t")
        if len(cells) != 6:
            diagnostics.append(Diagnostic(
                "malformed_row", None,
                f"expected 6 tab-separated columns, got {len(cells)}", lineno))
            continue
        state, phase, utterance, condition, actions, next_state = (c.strip() for c in cells)
        if not state:
            diagnostics.append(Diagnostic(
                "malformed_row", None, "empty state id", lineno))
            continue
        rows.append(SheetRow(state, phase, utterance, condition, actions, next_state, lineno))
    return rows, diagnostics


def parse_flow_sheet(sheet_text: str, strict_question_lint: bool = False) -> CompileResult:
    """Compile a sheet. The graph is returned only when fully valid."""
    rows, diagnostics = read_sheet(sheet_text)
    if not rows and not diagnostics:
        diagnostics.append(Diagnostic("empty_flow", None, "sheet has no rows"))
    if diagnostics:
        return CompileResult(None, diagnostics)

    order: list[str] = []
    phases: dict[str, str] = {}
    templates: dict[str, str] = {}
    entry_actions: dict[str, list[Action]] = {}
    transitions: dict[str, list[Transition]] = {}

    for row in rows:
        first_row_of_state = row.state not in phases
        if first_row_of_state:
            order.append(row.state)
            phases[row.state] = row.phase
            entry_actions[row.state] = []
            transitions[row.state] = []
            if row.phase not in PHASES:
                diagnostics.append(Diagnostic(
                    "unknown_phase", row.state,
                    f"phase {row.phase!r} not one of {', '.join(PHASES)}", row.line))
            if row.utterance:
                templates[row.state] = row.utterance
            else:
                diagnostics.append(Diagnostic(
                    "missing_utterance", row.state,
                    "first row of a state must carry its utterance", row.line))
        else:
            if row.phase != phases[row.state]:
                diagnostics.append(Diagnostic(
                    "malformed_row", row.state,
                    f"phase {row.phase!r} disagrees with earlier rows", row.line))
            if row.utterance:
                diagnostics.append(Diagnostic(
                    "duplicate_utterance", row.state,
                    "only the first row of a state may carry an utterance", row.line))

        try:
            actions = tuple(parse_actions(row.actions))
        except ActionSyntaxError as exc:
            diagnostics.append(Diagnostic("action_syntax", row.state, str(exc), row.line))
            continue

        if not row.condition:
            # declaration row: entry actions only, no transition
            if row.next_state:
                diagnostics.append(Diagnostic(
                    "malformed_row", row.state,
                    "row without a condition must not name a next state", row.line))
                continue
            if not first_row_of_state:
                diagnostics.append(Diagnostic(
                    "malformed_row", row.state,
                    "only the first row of a state may omit the condition", row.line))
                continue
            if any(isinstance(a, LlmAnswer) for a in actions):
                diagnostics.append(Diagnostic(
                    "invalid_entry_action", row.state,
                    "llm_answer() needs a user question; not allowed as an entry action",
                    row.line))
                continue
            entry_actions[row.state].extend(actions)
            continue

        if not row.next_state:
            diagnostics.append(Diagnostic(
                "malformed_row", row.state,
                "transition row must name a next state", row.line))
            continue
        try:
            condition = parse_condition(row.condition)
        except ConditionError as exc:
            diagnostics.append(Diagnostic("condition_syntax", row.state, str(exc), row.line))
            continue
        transitions[row.state].append(Transition(condition, actions, row.next_state, row.line))

    if diagnostics:
        return CompileResult(None, diagnostics)

    states = {
        sid: StateNode(
            state_id=sid,
            phase=phases[sid],
            utterance_template=templates[sid],
            entry_actions=tuple(entry_actions[sid]),
            transitions=tuple(transitions[sid]),
        )
        for sid in order
    }
    graph = FlowGraph(states=states, initial_state=order[0])

    diagnostics.extend(validate_graph(graph))
    if strict_question_lint:
        diagnostics.extend(question_lint(graph))
    if diagnostics:
        return CompileResult(None, diagnostics)
    return CompileResult(graph, [])


def validate_graph(graph: FlowGraph) -> list[Diagnostic]:
    """Structural lints. Empty result means every graph invariant holds."""
    diagnostics: list[Diagnostic] = []
    phase_rank = {p: i for i, p in enumerate(PHASES)}

    for sid, node in graph.states.items():
        default_indices = [
            i for i, t in enumerate(node.transitions) if isinstance(t.condition, Default)
        ]
        if not node.terminal and not default_indices:
            diagnostics.append(Diagnostic(
                "missing_default", sid, "last transition must be 'default'"))
        if default_indices and default_indices[0] < len(node.transitions) - 1:
            diagnostics.append(Diagnostic(
                "shadowed_transitions", sid,
                "rows after a 'default' transition can never fire"))
        for t in node.transitions:
            if t.next_state not in graph.states:
                diagnostics.append(Diagnostic(
                    "unknown_state", sid,
                    f"transition targets undefined state {t.next_state!r}", t.line))
            elif node.phase in phase_rank and graph.states[t.next_state].phase in phase_rank:
                if phase_rank[graph.states[t.next_state].phase] < phase_rank[node.phase]:
                    diagnostics.append(Diagnostic(
                        "phase_regression", sid,
                        f"transition to {t.next_state!r} moves from phase "
                        f"{node.phase!r} back to {graph.states[t.next_state].phase!r}",
                        t.line))

    for sid in _unreachable_states(graph):
        diagnostics.append(Diagnostic(
            "unreachable_state", sid, "not reachable from the initial state"))
    return diagnostics


def question_lint(graph: FlowGraph) -> list[Diagnostic]:
    """Every non-terminal utterance must end by asking the user something."""
    diagnostics = []
    for sid, node in graph.states.items():
        if node.terminal:
            continue
        if not node.utterance_template.endswith(QUESTION_SUFFIXES):
            diagnostics.append(Diagnostic(
                "missing_question_marker", sid,
                "non-terminal utterance must end with '？' or '?'"))
    return diagnostics


def _unreachable_states(graph: FlowGraph) -> list[str]:
    seen = set()
    stack = [graph.initial_state]
    while stack:
        sid = stack.pop()
        if sid in seen or sid not in graph.states:
            continue
        seen.add(sid)
        for t in graph.states[sid].transitions:
            stack.append(t.next_state)
    return [sid for sid in graph.states if sid not in seen]


def load_flow(path, strict_question_lint: bool = False) -> FlowGraph:
    """Read and compile a flow file; raise FlowError on any diagnostic."""
    with open(path, encoding="utf-8") as f:
        text = f.read()
    result = parse_flow_sheet(text, strict_question_lint=strict_question_lint)
    if result.graph is None:
        raise FlowError(result.diagnostics)
    return result.graph
