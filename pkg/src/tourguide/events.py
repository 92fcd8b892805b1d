"""Per-turn output events, in delivery order.

A turn produces an ordered event list: optional action events (image,
filler + answer, route cards), the entered state's utterance, and End as
the final event when the dialogue closes. The JSON wire shape used by the
session service and the simulator reports is produced by event_to_dict.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

from .routes import RouteCatalog


@dataclass(frozen=True)
class Utterance:
    text: str


@dataclass(frozen=True)
class Filler:
    text: str


@dataclass(frozen=True)
class ShowImageEvent:
    image_id: str


@dataclass(frozen=True)
class RouteCards:
    route_ids: tuple[str, str]
    reasons: tuple[str, ...]


@dataclass(frozen=True)
class End:
    pass


Event = Union[Utterance, Filler, ShowImageEvent, RouteCards, End]


@dataclass
class TurnOutput:
    events: list[Event] = field(default_factory=list)
    # language-model exchanges made during the turn, for logging/replay
    llm_exchanges: list = field(default_factory=list)

    def utterance_texts(self) -> list[str]:
        return [e.text for e in self.events if isinstance(e, Utterance)]

    @property
    def ended(self) -> bool:
        return bool(self.events) and isinstance(self.events[-1], End)


def event_to_dict(event: Event, catalog: RouteCatalog | None = None,
                  seq: int | None = None) -> dict:
    """Serialize one event to the wire schema; seq is added when given."""
    if isinstance(event, Utterance):
        payload: dict = {"type": "utterance", "text": event.text}
    elif isinstance(event, Filler):
        payload = {"type": "filler", "text": event.text}
    elif isinstance(event, ShowImageEvent):
        payload = {"type": "image", "image_id": event.image_id}
    elif isinstance(event, RouteCards):
        routes = []
        for route_id in event.route_ids:
            route = catalog.get(route_id) if catalog else None
            routes.append(route.as_dict() if route else {"route_id": route_id})
        payload = {"type": "routes", "routes": routes, "reasons": list(event.reasons)}
    elif isinstance(event, End):
        payload = {"type": "end"}
    else:
        raise TypeError(f"not an event: {event!r}")
    if seq is not None:
        payload["seq"] = seq
    return payload
