"""Utterance templates with {dotted.key} placeholders.

Views expose profile slots as "profile.<slot>" and the two selected routes
as "route1.<field>" / "route2.<field>". No escaping mechanism: templates
with literal braces are unsupported.
"""

from __future__ import annotations

import re
from typing import Mapping, Protocol

_PLACEHOLDER_RE = re.compile(r"\{([^{}]+)\}")


class MissingPlaceholderKeyError(KeyError):
    def __init__(self, key: str):
        super().__init__(key)
        self.key = key

    def __str__(self) -> str:
        return f"template placeholder {{{self.key}}} not available in view"


class SupportsLookup(Protocol):
    def get(self, key: str) -> str | None: ...


def render_template(template: str, view: SupportsLookup | Mapping[str, str]) -> str:
    """Replace every {key} with view's value for key.

    Raises MissingPlaceholderKeyError when the view has no value for a key.
    """

    def substitute(m: re.Match) -> str:
        key = m.group(1)
        value = view.get(key)
        if value is None:
            raise MissingPlaceholderKeyError(key)
        return value

    return _PLACEHOLDER_RE.sub(substitute, template)


def placeholder_keys(template: str) -> list[str]:
    """Placeholder names in document order (duplicates preserved)."""
    return _PLACEHOLDER_RE.findall(template)
