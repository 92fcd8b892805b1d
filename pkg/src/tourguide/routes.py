"""Tourist routes and the two-route recommendation.

Routes are plans visiting exactly two sightseeing spots, tagged with
(profile_key, value) preference pairs. Recommendation counts how many of a
route's tags exactly match the collected profile, takes the top two
(catalog order breaks ties), and renders one reason sentence per matched
tag so the user hears why each route was picked.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping


class CatalogTooSmallError(ValueError):
    pass


class CatalogError(ValueError):
    pass


@dataclass(frozen=True)
class TouristRoute:
    route_id: str
    name: str
    spots: tuple[str, str]
    transport: str
    tags: tuple[tuple[str, str], ...]
    description: str

    def as_dict(self) -> dict:
        return {
            "route_id": self.route_id,
            "name": self.name,
            "spots": list(self.spots),
            "transport": self.transport,
            "tags": [{"key": k, "value": v} for k, v in self.tags],
            "description": self.description,
        }


@dataclass(frozen=True)
class RouteCatalog:
    routes: tuple[TouristRoute, ...]

    def get(self, route_id: str) -> TouristRoute | None:
        for route in self.routes:
            if route.route_id == route_id:
                return route
        return None


def load_catalog(path: str | Path) -> RouteCatalog:
    with open(path, encoding="utf-8") as f:
        payload = json.load(f)
    return catalog_from_dict(payload)


def catalog_from_dict(payload: dict) -> RouteCatalog:
    routes = []
    seen_ids = set()
    for entry in payload.get("routes", []):
        spots = entry.get("spots", [])
        if len(spots) != 2:
            raise CatalogError(f"route {entry.get('route_id')!r} must visit exactly 2 spots")
        route = TouristRoute(
            route_id=entry["route_id"],
            name=entry["name"],
            spots=(spots[0], spots[1]),
            transport=entry.get("transport", ""),
            tags=tuple((t["key"], t["value"]) for t in entry.get("tags", [])),
            description=entry.get("description", ""),
        )
        if route.route_id in seen_ids:
            raise CatalogError(f"duplicate route_id {route.route_id!r}")
        seen_ids.add(route.route_id)
        routes.append(route)
    return RouteCatalog(tuple(routes))


def route_score(route: TouristRoute, profile: Mapping[str, str]) -> int:
    return sum(1 for key, value in route.tags if profile.get(key) == value)


def recommend_routes(
    profile: Mapping[str, str],
    catalog: RouteCatalog,
) -> tuple[TouristRoute, TouristRoute, list[str]]:
    """Top two routes by matched-tag count, with one reason per matched tag."""
    if len(catalog.routes) < 2:
        raise CatalogTooSmallError("need at least 2 routes to recommend")
    ranked = sorted(
        range(len(catalog.routes)),
        key=lambda i: (-route_score(catalog.routes[i], profile), i),
    )
    first = catalog.routes[ranked[0]]
    second = catalog.routes[ranked[1]]
    reasons = [
        reason_sentence(route, value)
        for route in (first, second)
        for key, value in route.tags
        if profile.get(key) == value
    ]
    return first, second, reasons


def reason_sentence(route: TouristRoute, matched_value: str) -> str:
    return f"{matched_value}がお好きと伺ったので、「{route.name}」がおすすめです。"
