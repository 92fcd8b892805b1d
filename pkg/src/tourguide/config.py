"""Service configuration: one JSON file plus environment overrides.

Config keys (all optional; omitted paths fall back to the packaged data)::

    {
      "flow_path": "flow.tsv",
      "resources_dir": "resources/",
      "routes_path": "routes.json",
      "example_threshold": 0.5,
      "llm": {
        "mode": "off" | "stub" | "http",
        "endpoint": "https://...",
        "model": "gpt-3.5-turbo",
        "api_key_env": "OPENAI_API_KEY",
        "timeout_ms": 8000,
        "max_answer_chars": 400,
        "filler_text": "...", "fallback_text": "...",
        "prompt_budget_chars": 1200
      },
      "service": {"host", "port", "queue_policy": "queue"|"busy",
                  "store_dir", "sse_heartbeat_s"}
    }

Environment variables named TOURGUIDE_<SECTION>_<KEY> override file values
(e.g. TOURGUIDE_LLM_MODEL, TOURGUIDE_SERVICE_PORT, TOURGUIDE_FLOW_PATH).
Secrets never live in the file: the API key is read from the environment
variable named by llm.api_key_env.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from importlib import resources as importlib_resources
from pathlib import Path

from .llm import DEFAULT_FALLBACK_TEXT, DEFAULT_FILLER_TEXT, LlmConfig

ENV_PREFIX = "TOURGUIDE_"

LLM_MODES = ("off", "stub", "http")
QUEUE_POLICIES = ("queue", "busy")


class ConfigError(ValueError):
    pass


def packaged_data_path(*parts: str) -> Path:
    return Path(str(importlib_resources.files("tourguide").joinpath("data", *parts)))


def default_flow_path() -> Path:
    return packaged_data_path("flow.tsv")


def default_resources_dir() -> Path:
    return packaged_data_path("resources")


def default_routes_path() -> Path:
    return packaged_data_path("routes.json")


def default_personas_dir() -> Path:
    return packaged_data_path("personas")


@dataclass
class ServiceSettings:
    host: str = "127.0.0.1"
    port: int = 8765
    queue_policy: str = "queue"
    store_dir: str = "./sessions"
    sse_heartbeat_s: float = 5.0


@dataclass
class AppConfig:
    flow_path: Path = field(default_factory=default_flow_path)
    resources_dir: Path = field(default_factory=default_resources_dir)
    routes_path: Path = field(default_factory=default_routes_path)
    example_threshold: float = 0.5
    llm_mode: str = "off"
    llm: LlmConfig = field(default_factory=LlmConfig)
    service: ServiceSettings = field(default_factory=ServiceSettings)


def load_config(path: str | Path | None = None,
                env: dict[str, str] | None = None) -> AppConfig:
    env = os.environ if env is None else env
    raw: dict = {}
    if path is not None:
        with open(path, encoding="utf-8") as f:
            raw = json.load(f)
        if not isinstance(raw, dict):
            raise ConfigError("config root must be a JSON object")

    def top(key: str, default):
        return env.get(f"{ENV_PREFIX}{key.upper()}", raw.get(key, default))

    llm_raw = raw.get("llm", {})
    service_raw = raw.get("service", {})

    def nested(section: str, data: dict, key: str, default):
        return env.get(f"{ENV_PREFIX}{section.upper()}_{key.upper()}",
                       data.get(key, default))

    llm_mode = str(nested("llm", llm_raw, "mode", "off"))
    if llm_mode not in LLM_MODES:
        raise ConfigError(f"llm.mode must be one of {LLM_MODES}, got {llm_mode!r}")

    llm = LlmConfig(
        endpoint_url=nested("llm", llm_raw, "endpoint", None),
        model_name=str(nested("llm", llm_raw, "model", "gpt-3.5-turbo")),
        api_key_env_var_name=nested("llm", llm_raw, "api_key_env", "OPENAI_API_KEY"),
        timeout_ms=int(nested("llm", llm_raw, "timeout_ms", 8000)),
        max_answer_chars=int(nested("llm", llm_raw, "max_answer_chars", 400)),
        filler_text=str(nested("llm", llm_raw, "filler_text", DEFAULT_FILLER_TEXT)),
        fallback_text=str(nested("llm", llm_raw, "fallback_text", DEFAULT_FALLBACK_TEXT)),
        prompt_budget_chars=int(nested("llm", llm_raw, "prompt_budget_chars", 1200)),
    )

    queue_policy = str(nested("service", service_raw, "queue_policy", "queue"))
    if queue_policy not in QUEUE_POLICIES:
        raise ConfigError(
            f"service.queue_policy must be one of {QUEUE_POLICIES}, got {queue_policy!r}")

    service = ServiceSettings(
        host=str(nested("service", service_raw, "host", "127.0.0.1")),
        port=int(nested("service", service_raw, "port", 8765)),
        queue_policy=queue_policy,
        store_dir=str(nested("service", service_raw, "store_dir", "./sessions")),
        sse_heartbeat_s=float(nested("service", service_raw, "sse_heartbeat_s", 5.0)),
    )

    return AppConfig(
        flow_path=Path(top("flow_path", default_flow_path())),
        resources_dir=Path(top("resources_dir", default_resources_dir())),
        routes_path=Path(top("routes_path", default_routes_path())),
        example_threshold=float(top("example_threshold", 0.5)),
        llm_mode=llm_mode,
        llm=llm,
        service=service,
    )
