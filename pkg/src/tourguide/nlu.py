"""Deterministic utterance understanding.

Three mechanisms feed every turn decision:

1. keyword extraction — named word sets matched by raw substring, plus a
   surface dictionary that tokenizes the utterance by greedy longest match
   and attaches uppercase labels (FOOD, PLACE, ...).
2. example matching — hashed character n-gram embeddings compared by
   cosine similarity against per-intent example sentences; the nearest
   example wins when its similarity clears the set threshold.
3. sentiment — a signed word lexicon summed over the utterance, with
   override word lists that force polarity outright (decline phrases such
   as 「結構です」 read as polite refusals even when the lexicon disagrees).

Everything here is pure and bit-exact across runs and platforms: the
embedder hashes n-grams with FNV-1a-64 over their UTF-8 bytes into 256
buckets and L2-normalizes the counts. External model-backed services can
substitute any mechanism at deploy time as long as they honor these
signatures.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

EMBEDDING_DIM = 256
NGRAM_SIZES = (1, 2, 3)
DEFAULT_EXAMPLE_THRESHOLD = 0.5
QUESTION_SUFFIX_CHARS = ("？", "?")

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_UINT64 = 0xFFFFFFFFFFFFFFFF


class DimensionMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class Token:
    surface: str
    label: str | None
    byte_span: tuple[int, int]


@dataclass(frozen=True)
class KeywordSpec:
    set_name: str
    words: frozenset[str]


@dataclass(frozen=True, eq=False)
class ExampleItem:
    intent_id: str
    example_text: str
    vector: np.ndarray


@dataclass(frozen=True, eq=False)
class ExampleSet:
    items: tuple[ExampleItem, ...]
    threshold: float = DEFAULT_EXAMPLE_THRESHOLD


@dataclass(frozen=True)
class SentimentResult:
    polarity: str  # "positive" | "negative" | "neutral"
    score: float
    overridden: bool


@dataclass(frozen=True)
class ExampleMatch:
    intent_id: str
    similarity: float


@dataclass(frozen=True)
class UnderstandingResult:
    raw_text: str
    tokens: tuple[Token, ...]
    matched_keyword_sets: frozenset[str]
    matched_labels: frozenset[str]
    example: ExampleMatch | None
    sentiment: SentimentResult
    is_question: bool


@dataclass(frozen=True)
class NluResources:
    """Immutable bundle consumed by understand(); see resources.load_resources."""

    label_dict: Mapping[str, str] = field(default_factory=dict)
    keyword_specs: tuple[KeywordSpec, ...] = ()
    example_set: ExampleSet = ExampleSet(items=())
    lexicon: Mapping[str, float] = field(default_factory=dict)
    negative_override: KeywordSpec = KeywordSpec("negative_override", frozenset())
    positive_override: KeywordSpec = KeywordSpec("positive_override", frozenset())
    question_markers: frozenset[str] = frozenset()


def tokenize_and_label(text: str, label_dict: Mapping[str, str]) -> list[Token]:
    """Greedy longest-match tokenization against the surface dictionary.

    Scans left to right; at each position the longest dictionary surface
    wins and carries its label. Maximal unmatched runs collapse into single
    label-less tokens. Concatenating surfaces always reproduces the input.
    """
    if not text:
        return []
    surfaces = set(label_dict)
    max_len = max((len(s) for s in surfaces), default=0)

    tokens: list[Token] = []
    run_start = 0  # start of the current unmatched run (code points)
    byte_pos = 0
    run_byte_start = 0
    i = 0

    def flush_run(end: int, end_byte: int) -> None:
        if run_start < end:
            tokens.append(Token(text[run_start:end], None, (run_byte_start, end_byte)))

    while i < len(text):
        match = None
        for length in range(min(max_len, len(text) - i), 0, -1):
            candidate = text[i:i + length]
            if candidate in surfaces:
                match = candidate
                break
        if match is None:
            byte_pos += len(text[i].encode("utf-8"))
            i += 1
            continue
        flush_run(i, byte_pos)
        match_bytes = len(match.encode("utf-8"))
        tokens.append(Token(match, label_dict[match], (byte_pos, byte_pos + match_bytes)))
        i += len(match)
        byte_pos += match_bytes
        run_start = i
        run_byte_start = byte_pos
    flush_run(len(text), byte_pos)
    return tokens


def extract_keywords(
    text: str,
    specs: Iterable[KeywordSpec],
    label_dict: Mapping[str, str],
) -> tuple[frozenset[str], frozenset[str]]:
    """(matched set names, matched labels) for one utterance.

    A set matches when any of its words occurs as a substring; labels come
    from the tokenizer.
    """
    matched_sets = frozenset(
        spec.set_name for spec in specs if any(w in text for w in spec.words)
    )
    matched_labels = frozenset(
        t.label for t in tokenize_and_label(text, label_dict) if t.label
    )
    return matched_sets, matched_labels


def fnv1a64(data: bytes) -> int:
    h = _FNV_OFFSET
    for b in data:
        h ^= b
        h = (h * _FNV_PRIME) & _UINT64
    return h


def embed_text(text: str) -> np.ndarray:
    """Hashed character n-gram embedding.

    Counts every 1/2/3-gram of the text's code points into the bucket
    fnv1a64(utf8(ngram)) % 256, then L2-normalizes. Empty text embeds to
    the zero vector.
    """
    vec = np.zeros(EMBEDDING_DIM, dtype=np.float64)
    for n in NGRAM_SIZES:
        for i in range(len(text) - n + 1):
            bucket = fnv1a64(text[i:i + n].encode("utf-8")) % EMBEDDING_DIM
            vec[bucket] += 1.0
    norm = float(np.linalg.norm(vec))
    if norm == 0.0:
        return vec
    return vec / norm


def cosine_similarity(a: np.ndarray, b: np.ndarray) -> float:
    """dot(a,b)/(|a||b|); zero when either vector is zero."""
    if a.shape != b.shape:
        raise DimensionMismatchError(f"dimension mismatch: {a.shape} vs {b.shape}")
    norm_a = float(np.linalg.norm(a))
    norm_b = float(np.linalg.norm(b))
    if norm_a == 0.0 or norm_b == 0.0:
        return 0.0
    return float(np.dot(a, b) / (norm_a * norm_b))


def match_example(text: str, example_set: ExampleSet) -> ExampleMatch | None:
    """Nearest example by cosine similarity, ties broken by item order.

    Returns None when the set is empty or the best similarity falls short
    of the set threshold.
    """
    if not example_set.items:
        return None
    query = embed_text(text)
    best_index = 0
    best_sim = cosine_similarity(query, example_set.items[0].vector)
    for idx in range(1, len(example_set.items)):
        sim = cosine_similarity(query, example_set.items[idx].vector)
        if sim > best_sim:
            best_sim = sim
            best_index = idx
    if best_sim < example_set.threshold:
        return None
    return ExampleMatch(example_set.items[best_index].intent_id, best_sim)


def analyze_sentiment(
    text: str,
    lexicon: Mapping[str, float],
    negative_override: KeywordSpec,
    positive_override: KeywordSpec,
) -> SentimentResult:
    """Lexicon-sum polarity with hard keyword overrides.

    Overrides exist because short refusals ("No thanks") defeat naive
    scoring; the negative list is checked first and wins conflicts. The
    lexicon score is reported even when an override decides the polarity.
    """
    score = sum(weight for word, weight in lexicon.items() if word in text)
    if any(w in text for w in negative_override.words):
        return SentimentResult("negative", score, overridden=True)
    if any(w in text for w in positive_override.words):
        return SentimentResult("positive", score, overridden=True)
    if score > 0:
        polarity = "positive"
    elif score < 0:
        polarity = "negative"
    else:
        polarity = "neutral"
    return SentimentResult(polarity, score, overridden=False)


def is_question(text: str, question_markers: Iterable[str]) -> bool:
    if any(ch in text for ch in QUESTION_SUFFIX_CHARS):
        return True
    return any(marker in text for marker in question_markers)


def understand(text: str, resources: NluResources) -> UnderstandingResult:
    """Run all mechanisms over one utterance and bundle the results."""
    tokens = tuple(tokenize_and_label(text, resources.label_dict))
    matched_sets = frozenset(
        spec.set_name for spec in resources.keyword_specs
        if any(w in text for w in spec.words)
    )
    matched_labels = frozenset(t.label for t in tokens if t.label)
    example = match_example(text, resources.example_set)
    sentiment = analyze_sentiment(
        text, resources.lexicon, resources.negative_override, resources.positive_override)
    return UnderstandingResult(
        raw_text=text,
        tokens=tokens,
        matched_keyword_sets=matched_sets,
        matched_labels=matched_labels,
        example=example,
        sentiment=sentiment,
        is_question=is_question(text, resources.question_markers),
    )


def build_example_set(
    pairs: Sequence[tuple[str, str]],
    threshold: float = DEFAULT_EXAMPLE_THRESHOLD,
) -> ExampleSet:
    """Embed (intent_id, example_text) pairs with the active embedder."""
    items = tuple(
        ExampleItem(intent_id, text, embed_text(text)) for intent_id, text in pairs
    )
    return ExampleSet(items=items, threshold=threshold)
