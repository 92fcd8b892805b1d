"""Language-model gateway for free-form user questions.

The dialogue flow delegates open questions to a chat-completion service.
Because that call is slow, the turn emits a short filler utterance
(「少々お待ちください」) before the request starts, and every failure mode
(timeout, HTTP error, content filter, missing credentials) degrades to a
configured fallback utterance so a turn can never die on the network.

Transports are injectable: the HTTP transport is only used when an
endpoint is configured, and scripted/delayed/canned stand-ins keep the
whole test suite and the simulator offline.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from concurrent.futures import TimeoutError as FutureTimeoutError
from dataclasses import dataclass
from typing import Protocol, Sequence

import httpx

from .events import Filler
from .routes import TouristRoute

DEFAULT_FILLER_TEXT = "少々お待ちください"
DEFAULT_FALLBACK_TEXT = "すみません、いまはうまくお答えできません。ほかに聞いてみたいことはありますか？"

PROMPT_INSTRUCTION = (
    "あなたは観光案内ロボットです。お客様の質問に、丁寧な日本語で2文以内で簡潔に答えてください。"
)

MAX_PROMPT_HISTORY_TURNS = 6

SENTENCE_ENDINGS = ("。", ".")


class LlmTimeoutError(Exception):
    pass


class LlmHttpError(Exception):
    pass


class LlmFilteredError(Exception):
    pass


@dataclass(frozen=True)
class LlmConfig:
    endpoint_url: str | None = None
    model_name: str = "gpt-3.5-turbo"
    api_key_env_var_name: str | None = "OPENAI_API_KEY"
    timeout_ms: int = 8000
    max_answer_chars: int = 400
    filler_text: str = DEFAULT_FILLER_TEXT
    fallback_text: str = DEFAULT_FALLBACK_TEXT
    prompt_budget_chars: int = 1200

    def __post_init__(self):
        if self.timeout_ms <= 0:
            raise ValueError("timeout_ms must be > 0")
        if self.max_answer_chars <= 0:
            raise ValueError("max_answer_chars must be > 0")


@dataclass(frozen=True)
class LlmExchange:
    prompt: str
    answer: str | None
    latency_ms: int
    outcome: str  # "ok" | "timeout" | "http_error" | "filtered"

    @property
    def ok(self) -> bool:
        return self.outcome == "ok"


class PromptView(Protocol):
    """What build_prompt needs from a live session."""

    def history_turns(self) -> Sequence[tuple[str, str]]: ...

    def selected_routes(self) -> tuple[TouristRoute, TouristRoute] | None: ...


class LlmTransport(Protocol):
    def complete(self, prompt: str, config: LlmConfig) -> str: ...


def build_prompt(question: str, view: PromptView, config: LlmConfig) -> str:
    """Compose the request prompt within the character budget.

    Includes the guide-robot instruction, the two recommended routes when
    already chosen, and up to the last 6 history turns. When the budget is
    exceeded, the oldest history lines are dropped first.
    """
    head = [PROMPT_INSTRUCTION]
    routes = view.selected_routes()
    if routes:
        head.append("紹介中のルート:")
        for i, route in enumerate(routes, start=1):
            head.append(f"{i}. {route.name}（{route.spots[0]}・{route.spots[1]}、{route.transport}）")

    history = [
        ("ユーザー: " if speaker == "user" else "システム: ") + text
        for speaker, text in view.history_turns()[-MAX_PROMPT_HISTORY_TURNS:]
    ]
    tail = [f"質問: {question}"]

    def assemble(hist: list[str]) -> str:
        return "\n".join(head + (["会話の流れ:"] + hist if hist else []) + tail)

    prompt = assemble(history)
    while history and len(prompt) > config.prompt_budget_chars:
        history.pop(0)
        prompt = assemble(history)
    return prompt[:config.prompt_budget_chars]


def truncate_answer(text: str, max_chars: int) -> str:
    """Cap the answer length, cutting at the last sentence end before the cap."""
    if len(text) <= max_chars:
        return text
    window = text[:max_chars]
    cut = max(window.rfind(end) for end in SENTENCE_ENDINGS)
    if cut >= 0:
        return window[:cut + 1]
    return window


class LlmGateway:
    """Executes question-answer exchanges against an injectable transport."""

    def __init__(self, config: LlmConfig | None = None,
                 transport: LlmTransport | None = None,
                 clock=time.monotonic):
        self.config = config or LlmConfig()
        self.transport = transport if transport is not None else NullTransport()
        self.clock = clock

    def filler_event(self) -> Filler:
        return Filler(self.config.filler_text)

    def execute(self, question: str, view: PromptView) -> LlmExchange:
        """Run one exchange; never raises — failures become outcomes."""
        prompt = build_prompt(question, view, self.config)
        started = self.clock()

        def elapsed_ms() -> int:
            return int((self.clock() - started) * 1000)

        executor = ThreadPoolExecutor(max_workers=1)
        try:
            future = executor.submit(self.transport.complete, prompt, self.config)
            answer = future.result(timeout=self.config.timeout_ms / 1000.0)
        except FutureTimeoutError:
            return LlmExchange(prompt, None, elapsed_ms(), "timeout")
        except LlmTimeoutError:
            return LlmExchange(prompt, None, elapsed_ms(), "timeout")
        except LlmFilteredError:
            return LlmExchange(prompt, None, elapsed_ms(), "filtered")
        except Exception:
            # transport bugs included: a turn must always complete
            return LlmExchange(prompt, None, elapsed_ms(), "http_error")
        finally:
            executor.shutdown(wait=False)
        answer = truncate_answer(answer, self.config.max_answer_chars)
        return LlmExchange(prompt, answer, elapsed_ms(), "ok")


def answer_question(question: str, view: PromptView, config: LlmConfig,
                    transport: LlmTransport | None = None) -> tuple[list[Filler], LlmExchange]:
    """One-shot form: ([filler event], exchange).

    The filler event is deliverable immediately; streaming callers emit it
    before calling execute so the user hears it while the request runs.
    """
    gateway = LlmGateway(config, transport)
    return [gateway.filler_event()], gateway.execute(question, view)


class NullTransport:
    """No language model configured: every call reports http_error."""

    def complete(self, prompt: str, config: LlmConfig) -> str:
        raise LlmHttpError("language model transport not configured")


class ScriptedTransport:
    """Replays a fixed script of answers and/or exceptions, in order."""

    def __init__(self, script: Sequence[str | Exception]):
        self.script = list(script)
        self.calls: list[str] = []

    def complete(self, prompt: str, config: LlmConfig) -> str:
        self.calls.append(prompt)
        if len(self.calls) > len(self.script):
            raise LlmHttpError("scripted transport exhausted")
        entry = self.script[len(self.calls) - 1]
        if isinstance(entry, Exception):
            raise entry
        return entry


class DelayedTransport:
    """Wraps a transport with a fixed pre-response delay (latency stub)."""

    def __init__(self, inner: LlmTransport, delay_s: float):
        self.inner = inner
        self.delay_s = delay_s

    def complete(self, prompt: str, config: LlmConfig) -> str:
        time.sleep(self.delay_s)
        return self.inner.complete(prompt, config)


class CannedTransport:
    """Deterministic canned answers chosen by an injected RNG (simulator stub)."""

    def __init__(self, answers: Sequence[str], rng):
        if not answers:
            raise ValueError("need at least one canned answer")
        self.answers = list(answers)
        self.rng = rng

    def complete(self, prompt: str, config: LlmConfig) -> str:
        return self.rng.choice(self.answers)


class HttpChatTransport:
    """Real chat-completion HTTP transport.

    Sends {"model", "messages":[{"role","content"}]} with a bearer token
    read from the environment variable named in the config. Missing
    credentials fail before any request is built.
    """

    def __init__(self, http_client: httpx.Client | None = None):
        self._client = http_client

    def complete(self, prompt: str, config: LlmConfig) -> str:
        if not config.endpoint_url:
            raise LlmHttpError("no endpoint configured")
        env_name = config.api_key_env_var_name
        api_key = os.environ.get(env_name, "") if env_name else ""
        if not api_key:
            raise LlmHttpError(f"credentials not found in ${env_name}")

        body = {
            "model": config.model_name,
            "messages": [{"role": "user", "content": prompt}],
        }
        headers = {"Authorization": f"Bearer {api_key}"}
        timeout = config.timeout_ms / 1000.0
        try:
            if self._client is not None:
                response = self._client.post(
                    config.endpoint_url, json=body, headers=headers, timeout=timeout)
            else:
                with httpx.Client(timeout=timeout) as client:
                    response = client.post(config.endpoint_url, json=body, headers=headers)
        except httpx.TimeoutException as exc:
            raise LlmTimeoutError(str(exc)) from exc
        except httpx.HTTPError as exc:
            raise LlmHttpError(str(exc)) from exc

        if response.status_code != 200:
            raise LlmHttpError(f"HTTP {response.status_code}")
        try:
            choice = response.json()["choices"][0]
        except (KeyError, IndexError, ValueError) as exc:
            raise LlmHttpError(f"malformed response: {exc}") from exc
        if choice.get("finish_reason") == "content_filter":
            raise LlmFilteredError("response filtered")
        content = choice.get("message", {}).get("content")
        if not isinstance(content, str):
            raise LlmHttpError("missing message content")
        return content
