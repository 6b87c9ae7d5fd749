import os

import pytest

import ciel_toolkit
from ciel_toolkit.core.agentlogic import Agent, AgentModel
from ciel_toolkit.core.generators import make_rng
from ciel_toolkit.core.semantics import CielModel, GelModel
from ciel_toolkit.performance import performance_monitor

DERIVATIONS_DIR = os.path.join(os.path.dirname(ciel_toolkit.__file__), "data", "derivations")


def equivalence(worlds, blocks):
    """Equivalence relation on worlds given as a list of blocks; unlisted worlds are singletons"""
    listed = {w for block in blocks for w in block}
    blocks = list(blocks) + [[w] for w in worlds if w not in listed]
    return frozenset((x, y) for block in blocks for x in block for y in block)


@pytest.fixture
def rng():
    return make_rng(1234)


@pytest.fixture(autouse=True)
def fresh_metrics():
    performance_monitor.reset_metrics()
    yield
    performance_monitor.configure(None)


@pytest.fixture
def two_world_model():
    """x ~a y with p true only at x; agent a has q true, agent b has q false and sees nothing"""
    worlds = ("x", "y")
    agents = (Agent.from_mapping("a", {"q": True}), Agent.from_mapping("b", {"q": False}))
    return CielModel(
        worlds=worlds,
        world_valuation={"p": frozenset({"x"})},
        indist={"a": equivalence(worlds, [["x", "y"]]), "b": equivalence(worlds, [])},
        agent_model=AgentModel(agents=agents),
    )


@pytest.fixture
def chain_model():
    """x ~a y ~b z; p holds at x and y, r holds everywhere"""
    worlds = ("x", "y", "z")
    agents = (Agent.from_mapping("a", {"q": True, "r": False}),
              Agent.from_mapping("b", {"q": False, "r": True}))
    return CielModel(
        worlds=worlds,
        world_valuation={"p": frozenset({"x", "y"}), "r": frozenset(worlds)},
        indist={"a": equivalence(worlds, [["x", "y"]]), "b": equivalence(worlds, [["y", "z"]])},
        agent_model=AgentModel(agents=agents),
    )


@pytest.fixture
def chain_gel_model():
    worlds = ("x", "y", "z")
    return GelModel(
        worlds=worlds,
        world_valuation={"p": frozenset({"x", "y"})},
        indist={"a": equivalence(worlds, [["x", "y"]]), "b": equivalence(worlds, [["y", "z"]])},
        named_agents=("a", "b"),
    )
