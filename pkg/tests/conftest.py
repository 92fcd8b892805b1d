import itertools

import pytest

from tourguide.config import (
    default_flow_path,
    default_personas_dir,
    default_resources_dir,
    default_routes_path,
)
from tourguide.engine import DialogueEngine
from tourguide.flow import load_flow
from tourguide.llm import LlmConfig, LlmGateway, ScriptedTransport
from tourguide.resources import load_resources
from tourguide.routes import load_catalog
from tourguide.simulator import load_persona_pack


@pytest.fixture(scope="session")
def shipped_graph():
    return load_flow(default_flow_path())


@pytest.fixture(scope="session")
def shipped_resources():
    return load_resources(default_resources_dir())


@pytest.fixture(scope="session")
def shipped_catalog():
    return load_catalog(default_routes_path())


@pytest.fixture(scope="session")
def shipped_personas():
    return load_persona_pack(default_personas_dir())


def counting_clock():
    counter = itertools.count()
    return lambda: float(next(counter))


def sequential_ids(prefix="s"):
    counter = itertools.count()
    return lambda: f"{prefix}{next(counter)}"


def make_engine(graph, resources, catalog=None, script=(), **kwargs):
    """Deterministic engine: counting clock, sequential ids, scripted LLM."""
    gateway = LlmGateway(LlmConfig(), ScriptedTransport(list(script)))
    return DialogueEngine(
        graph,
        resources,
        catalog=catalog,
        gateway=gateway,
        clock=kwargs.pop("clock", counting_clock()),
        id_factory=kwargs.pop("id_factory", sequential_ids()),
        **kwargs,
    )
