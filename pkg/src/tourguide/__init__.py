"""Tourist-guide dialogue engine.

A spreadsheet-style flow sheet compiles to a state machine; each user turn
runs through deterministic understanding (keywords, example matching by
embedding similarity, sentiment with override lists) to pick the next
state, collect preferences, recommend two tourist routes with reasons, and
delegate open questions to a language model behind a filler-utterance
latency contract.
"""

from .conditions import parse_condition, print_condition
from .engine import DialogueEngine, Session, SessionView, evaluate_condition, select_topic
from .events import End, Filler, RouteCards, ShowImageEvent, TurnOutput, Utterance
from .flow import Diagnostic, FlowError, FlowGraph, load_flow, parse_flow_sheet, validate_graph
from .llm import LlmConfig, LlmGateway, answer_question, build_prompt
from .nlu import (
    NluResources,
    UnderstandingResult,
    analyze_sentiment,
    cosine_similarity,
    embed_text,
    extract_keywords,
    match_example,
    tokenize_and_label,
    understand,
)
from .resources import load_resources
from .routes import RouteCatalog, TouristRoute, load_catalog, recommend_routes
from .simulator import Persona, SimReport, coverage_report, estimate_duration, run_persona
from .templates import render_template

__version__ = "0.1.0"
