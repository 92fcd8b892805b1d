"""Load the NLU resource bundle from a directory of TSV files.

Expected files (UTF-8, tab-separated, "#" comments, blank lines ignored):

    keywords.tsv            set_name <TAB> word
    labels.tsv              surface <TAB> LABEL
    examples.tsv            intent_id <TAB> example_text
    sentiment_lexicon.tsv   word <TAB> signed_weight
    overrides.tsv           polarity <TAB> word     (polarity: negative|positive)

The reserved keyword set name ``question_markers`` doubles as the list of
words that flag an utterance as a question (besides a trailing ？/?).
"""

from __future__ import annotations

from pathlib import Path

from .nlu import (
    DEFAULT_EXAMPLE_THRESHOLD,
    KeywordSpec,
    NluResources,
    build_example_set,
)

QUESTION_MARKER_SET = "question_markers"

RESOURCE_FILES = (
    "keywords.tsv",
    "labels.tsv",
    "examples.tsv",
    "sentiment_lexicon.tsv",
    "overrides.tsv",
)


class ResourceError(ValueError):
    pass


def _read_pairs(path: Path) -> list[tuple[str, str]]:
    pairs: list[tuple[str, str]] = []
    if not path.exists():
        return pairs
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        cells = raw.split("\t")
        if len(cells) != 2:
            raise ResourceError(f"{path.name}:{lineno}: expected 2 columns, got {len(cells)}")
        first, second = cells[0].strip(), cells[1].strip()
        if not first or not second:
            raise ResourceError(f"{path.name}:{lineno}: empty cell")
        pairs.append((first, second))
    return pairs


def load_resources(
    directory: str | Path,
    example_threshold: float = DEFAULT_EXAMPLE_THRESHOLD,
) -> NluResources:
    directory = Path(directory)

    grouped: dict[str, set[str]] = {}
    for set_name, word in _read_pairs(directory / "keywords.tsv"):
        grouped.setdefault(set_name, set()).add(word)
    keyword_specs = tuple(
        KeywordSpec(name, frozenset(words)) for name, words in grouped.items()
    )

    label_dict: dict[str, str] = {}
    for surface, label in _read_pairs(directory / "labels.tsv"):
        if not label.isupper():
            raise ResourceError(f"labels.tsv: label {label!r} must be uppercase")
        label_dict[surface] = label

    example_pairs = _read_pairs(directory / "examples.tsv")
    example_set = build_example_set(example_pairs, threshold=example_threshold)

    lexicon: dict[str, float] = {}
    for word, weight in _read_pairs(directory / "sentiment_lexicon.tsv"):
        try:
            lexicon[word] = float(weight)
        except ValueError:
            raise ResourceError(f"sentiment_lexicon.tsv: bad weight {weight!r} for {word!r}")

    negative: set[str] = set()
    positive: set[str] = set()
    for polarity, word in _read_pairs(directory / "overrides.tsv"):
        if polarity == "negative":
            negative.add(word)
        elif polarity == "positive":
            positive.add(word)
        else:
            raise ResourceError(f"overrides.tsv: polarity {polarity!r} must be negative|positive")

    question_markers = grouped.get(QUESTION_MARKER_SET, set())

    return NluResources(
        label_dict=label_dict,
        keyword_specs=keyword_specs,
        example_set=example_set,
        lexicon=lexicon,
        negative_override=KeywordSpec("negative_override", frozenset(negative)),
        positive_override=KeywordSpec("positive_override", frozenset(positive)),
        question_markers=frozenset(question_markers),
    )
