"""Side-effect mini-language attached to flow rows.

An actions cell is a ";"-separated list of calls:

    set(key,value)      store a literal in the profile slot `key`
    set(key,$utterance) store the raw user utterance instead
    show_image(id)      display an image on the monitor
    llm_answer()        answer the user's question via the language-model gateway
    recommend_routes()  pick and present the two best tourist routes
    end()               close the dialogue

Slot keys and image ids must match [a-z0-9_]+.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

UTTERANCE_SENTINEL = "$utterance"

_KEY_RE = re.compile(r"[a-z0-9_]+\Z")
_CALL_RE = re.compile(r"\s*([a-z_]+)\s*\(([^()]*)\)\s*\Z")


class ActionSyntaxError(ValueError):
    pass


@dataclass(frozen=True)
class SetSlot:
    key: str
    value: str  # literal, or UTTERANCE_SENTINEL


@dataclass(frozen=True)
class ShowImage:
    image_id: str


@dataclass(frozen=True)
class LlmAnswer:
    pass


@dataclass(frozen=True)
class RecommendRoutes:
    pass


@dataclass(frozen=True)
class EndDialogue:
    pass


Action = Union[SetSlot, ShowImage, LlmAnswer, RecommendRoutes, EndDialogue]


def parse_actions(src: str) -> list[Action]:
    """Parse an actions cell. Empty/blank source means no actions."""
    actions: list[Action] = []
    for part in src.split(";"):
        if not part.strip():
            continue
        actions.append(_parse_call(part))
    return actions


def _parse_call(src: str) -> Action:
    m = _CALL_RE.match(src)
    if not m:
        raise ActionSyntaxError(f"malformed action: {src.strip()!r}")
    name, raw_args = m.group(1), m.group(2)
    args = [a.strip() for a in raw_args.split(",")] if raw_args.strip() else []

    if name == "set":
        if len(args) != 2:
            raise ActionSyntaxError(f"set() takes 2 arguments, got {len(args)}")
        key, value = args
        if not _KEY_RE.match(key):
            raise ActionSyntaxError(f"bad profile key: {key!r}")
        if not value:
            raise ActionSyntaxError("set() value must be non-empty")
        return SetSlot(key, value)
    if name == "show_image":
        if len(args) != 1 or not _KEY_RE.match(args[0]):
            raise ActionSyntaxError(f"show_image() needs one [a-z0-9_]+ id, got {args!r}")
        return ShowImage(args[0])
    if name == "llm_answer":
        if args:
            raise ActionSyntaxError("llm_answer() takes no arguments")
        return LlmAnswer()
    if name == "recommend_routes":
        if args:
            raise ActionSyntaxError("recommend_routes() takes no arguments")
        return RecommendRoutes()
    if name == "end":
        if args:
            raise ActionSyntaxError("end() takes no arguments")
        return EndDialogue()
    raise ActionSyntaxError(f"unknown action: {name!r}")
