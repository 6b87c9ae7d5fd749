"""
Finite epistemic models and model checking for the CIEL reasoning toolkit

A C-formula C[psi] phi holds at x when phi holds at every world reachable from x
through the reflexive-transitive closure of the union of the relations of the
agents satisfying psi. Relation pairs are read in both directions, so an input
relation and its equivalence closure give every C-formula the same extension.
"""
import logging
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, FrozenSet, Iterable, List, Mapping, Set, Tuple

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .agentlogic import Agent, AgentModel, AgentTheory, denote, evaluate
from .errors import ModelValidationError, UnknownWorldError
from .formula import And, Atom, Common, Falsum, GroupCommon, Not, WorldFormula, to_text

logger = logging.getLogger(__name__)

Relation = FrozenSet[Tuple[str, str]]


@dataclass(frozen=True, eq=False)
class KripkeStructure:
    """Worlds, world valuation and one relation per agent name"""
    worlds: Tuple[str, ...]
    world_valuation: Mapping[str, FrozenSet[str]]
    indist: Mapping[str, Relation]

    @cached_property
    def world_set(self) -> FrozenSet[str]:
        return frozenset(self.worlds)

    @cached_property
    def successors(self) -> Dict[str, Dict[str, Set[str]]]:
        """Neighbours per agent; each pair is read in both directions"""
        table = {}
        for name, relation in self.indist.items():
            succ = {}
            for x, y in relation:
                succ.setdefault(x, set()).add(y)
                succ.setdefault(y, set()).add(x)
            table[name] = succ
        return table

    def require_world(self, world: str):
        if world not in self.world_set:
            raise UnknownWorldError(world)

    def reach(self, names: Iterable[str], world: str) -> FrozenSet[str]:
        """Breadth-first search over the union of the named relations"""
        self.require_world(world)
        tables = [self.successors.get(name, {}) for name in names]
        visited = {world}
        queue = deque([world])
        while queue:
            current = queue.popleft()
            for succ in tables:
                for nxt in succ.get(current, ()):
                    if nxt not in visited:
                        visited.add(nxt)
                        queue.append(nxt)
        return frozenset(visited)

    def true_atoms(self, world: str) -> List[str]:
        return sorted(atom for atom, ws in self.world_valuation.items() if world in ws)


@dataclass(frozen=True, eq=False)
class CielModel(KripkeStructure):
    """Explicit CIEL model; indist is keyed by agent name"""
    agent_model: AgentModel = AgentModel(agents=())

    def agent_names(self, formula) -> FrozenSet[str]:
        return frozenset(agent.name for agent in denote(formula, self.agent_model))


@dataclass(frozen=True, eq=False)
class GelModel(KripkeStructure):
    """Explicit GEL model over a finite set of agent names"""
    named_agents: Tuple[str, ...] = ()


@dataclass(frozen=True, eq=False)
class PseudoModel:
    """Worlds with one relation per set of agents, used by the decision procedure"""
    worlds: Tuple[str, ...]
    agent_model: AgentModel
    world_valuation: Mapping[str, FrozenSet[str]]
    indist_by_set: Mapping[FrozenSet[str], Relation] = field(default_factory=dict)


# ---------------------------------------------------------------------------
# Model checking
# ---------------------------------------------------------------------------

def group_reach(model: KripkeStructure, agents: Iterable, world: str) -> FrozenSet[str]:
    """
    Worlds reachable from world through the group closure of agents

    Args:
        model: CIEL or GEL model
        agents: Agents or agent names
        world: Start world

    Returns:
        The closure class of world
    """
    names = [a.name if isinstance(a, Agent) else a for a in agents]
    return model.reach(names, world)


class _Evaluator:
    """Computes extensions with one memo table per evaluation"""

    def __init__(self, model: KripkeStructure, use_fixpoint: bool = False):
        self.model = model
        self.use_fixpoint = use_fixpoint
        self.memo: Dict[WorldFormula, FrozenSet[str]] = {}

    def extension(self, formula: WorldFormula) -> FrozenSet[str]:
        if formula in self.memo:
            return self.memo[formula]
        model = self.model
        if isinstance(formula, Falsum):
            result = frozenset()
        elif isinstance(formula, Atom):
            result = frozenset(model.world_valuation.get(formula.name, frozenset())) & model.world_set
        elif isinstance(formula, Not):
            result = model.world_set - self.extension(formula.sub)
        elif isinstance(formula, And):
            result = self.extension(formula.left) & self.extension(formula.right)
        elif isinstance(formula, (Common, GroupCommon)):
            names = self._group(formula)
            body = self.extension(formula.body)
            if self.use_fixpoint:
                result = _greatest_fixpoint(model, names, body)[-1]
            else:
                result = self._common(names, body)
        else:
            raise TypeError(f"not a world formula: {formula!r}")
        self.memo[formula] = result
        return result

    def _group(self, formula) -> FrozenSet[str]:
        if isinstance(formula, GroupCommon):
            return frozenset(formula.group)
        if not isinstance(self.model, CielModel):
            raise TypeError("indexed C-formulas need a CIEL model")
        return self.model.agent_names(formula.index)

    def _common(self, names, body) -> FrozenSet[str]:
        # closure classes partition the worlds, so each class is searched once
        model = self.model
        result = set()
        seen = set()
        for world in model.worlds:
            if world in seen:
                continue
            block = model.reach(names, world)
            seen |= block
            if block <= body:
                result |= block
        return frozenset(result)


def extension(model: KripkeStructure, formula: WorldFormula) -> FrozenSet[str]:
    """The set of worlds where formula holds"""
    return _Evaluator(model).extension(formula)


def extensions(model: KripkeStructure, formulas: Iterable[WorldFormula]) -> Dict[WorldFormula, FrozenSet[str]]:
    """Extensions of several formulas sharing one memo table"""
    evaluator = _Evaluator(model)
    return {formula: evaluator.extension(formula) for formula in formulas}


def check(model: CielModel, world: str, formula: WorldFormula) -> bool:
    """
    Truth of a CIEL formula at a world

    Args:
        model: CIEL model
        world: World identifier
        formula: World formula; absent atoms are false

    Returns:
        True if formula holds at world
    """
    model.require_world(world)
    return world in extension(model, formula)


def check_gel(model: GelModel, world: str, formula: WorldFormula) -> bool:
    """Truth of a GEL formula (C{...} operators) at a world"""
    model.require_world(world)
    return world in extension(model, formula)


def _greatest_fixpoint(model: KripkeStructure, names, body) -> List[FrozenSet[str]]:
    tables = [model.successors.get(name, {}) for name in names]
    current = model.world_set
    chain = [current]
    while True:
        following = frozenset(
            x for x in body
            if all(y in current for succ in tables for y in succ.get(x, ())))
        if following == current:
            return chain
        chain.append(following)
        current = following


def gfp_iterates(model: CielModel, formula: Common) -> List[FrozenSet[str]]:
    """
    Decreasing chain U0 = worlds, U(k+1) = F(Uk) for a C-formula

    F(U) keeps the worlds where the body holds and every one-step successor of an
    index agent lies in U. Bodies are evaluated with the same fixpoint method.
    """
    if not isinstance(formula, Common):
        raise TypeError("gfp iteration applies to C-formulas")
    evaluator = _Evaluator(model, use_fixpoint=True)
    body = evaluator.extension(formula.body)
    return _greatest_fixpoint(model, model.agent_names(formula.index), body)


def check_gfp(model: CielModel, formula: Common) -> FrozenSet[str]:
    """Extension of a C-formula computed as a greatest fixpoint"""
    chain = gfp_iterates(model, formula)
    logger.debug(f"Fixpoint for {to_text(formula)} reached after {len(chain) - 1} steps")
    return chain[-1]


def extension_gfp(model: CielModel, formula: WorldFormula) -> FrozenSet[str]:
    """Extension of any formula with every C evaluated by fixpoint iteration"""
    return _Evaluator(model, use_fixpoint=True).extension(formula)


def check_pseudo(model: PseudoModel, world: str, formula: WorldFormula) -> bool:
    """Truth over a pseudo-model; C[psi] uses the relation stored for the denotation of psi"""
    worlds = frozenset(model.worlds)
    if world not in worlds:
        raise UnknownWorldError(world)
    memo = {}

    def ext(f):
        if f in memo:
            return memo[f]
        if isinstance(f, Falsum):
            result = frozenset()
        elif isinstance(f, Atom):
            result = frozenset(model.world_valuation.get(f.name, frozenset())) & worlds
        elif isinstance(f, Not):
            result = worlds - ext(f.sub)
        elif isinstance(f, And):
            result = ext(f.left) & ext(f.right)
        elif isinstance(f, Common):
            group = frozenset(a.name for a in denote(f.index, model.agent_model))
            relation = model.indist_by_set.get(group, frozenset())
            body = ext(f.body)
            succ = {}
            for x, y in relation:
                succ.setdefault(x, set()).add(y)
            result = frozenset(x for x in body if succ.get(x, set()) <= body)
        else:
            raise TypeError(f"not a CIEL formula: {f!r}")
        memo[f] = result
        return result

    return world in ext(formula)


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

def equivalence_closure(worlds: Tuple[str, ...], relation: Iterable[Tuple[str, str]]) -> Relation:
    """Reflexive-symmetric-transitive closure, via connected components"""
    index = {w: i for i, w in enumerate(worlds)}
    pairs = list(relation)
    rows = np.array([index[x] for x, _ in pairs], dtype=np.int64)
    cols = np.array([index[y] for _, y in pairs], dtype=np.int64)
    graph = coo_matrix((np.ones(len(pairs), dtype=np.int8), (rows, cols)),
                       shape=(len(worlds), len(worlds))).tocsr()
    _, labels = connected_components(graph, directed=False)
    blocks: Dict[int, List[str]] = {}
    for w, label in zip(worlds, labels):
        blocks.setdefault(int(label), []).append(w)
    return frozenset((x, y) for block in blocks.values() for x in block for y in block)


def validate(model: CielModel, mode: str = "strict") -> CielModel:
    """
    Check or repair the indistinguishability relations

    Args:
        model: Model to validate
        mode: "strict" rejects non-equivalences, "normalize" replaces every relation
              by its equivalence closure

    Returns:
        The validated (possibly normalized) model
    """
    if mode not in ("strict", "normalize"):
        raise ValueError(f"unknown validation mode: {mode}")

    known = set(model.agent_model.names)
    for name in sorted(model.indist):
        if name not in known:
            raise ModelValidationError(name, None, "not an agent of the agent model")
        for x, y in sorted(model.indist[name]):
            if x not in model.world_set or y not in model.world_set:
                raise ModelValidationError(name, (x, y), "relation mentions an unknown world")

    if mode == "normalize":
        indist = {name: equivalence_closure(model.worlds, model.indist.get(name, ()))
                  for name in model.agent_model.names}
        return CielModel(worlds=model.worlds, world_valuation=model.world_valuation,
                         indist=indist, agent_model=model.agent_model)

    for name in sorted(model.indist):
        relation = model.indist[name]
        for x in model.worlds:
            if (x, x) not in relation:
                raise ModelValidationError(name, (x, x), "relation is not reflexive")
        for x, y in sorted(relation):
            if (y, x) not in relation:
                raise ModelValidationError(name, (x, y), "relation is not symmetric")
        succ = model.successors[name]
        for x, y in sorted(relation):
            for z in sorted(succ.get(y, ())):
                if (x, z) not in relation:
                    raise ModelValidationError(name, (x, z), "relation is not transitive")
    return model


def restrict(model: CielModel, worlds: Iterable[str]) -> CielModel:
    """Submodel on a subset of worlds, relations and valuation restricted"""
    keep = [w for w in model.worlds if w in set(worlds)]
    kept = frozenset(keep)
    return CielModel(
        worlds=tuple(keep),
        world_valuation={atom: frozenset(ws) & kept for atom, ws in model.world_valuation.items()},
        indist={name: frozenset((x, y) for x, y in rel if x in kept and y in kept)
                for name, rel in model.indist.items()},
        agent_model=model.agent_model,
    )


# ---------------------------------------------------------------------------
# File representation
# ---------------------------------------------------------------------------

def model_to_dict(model: CielModel) -> dict:
    """JSON-ready dictionary in the model file schema"""
    return {
        "worlds": list(model.worlds),
        "agents": [{"name": a.name, "valuation": dict(a.valuation)} for a in model.agent_model.agents],
        "theory": model.agent_model.theory.texts(),
        "world_valuation": {atom: sorted(ws) for atom, ws in sorted(model.world_valuation.items())},
        "indist": {name: sorted([x, y] for x, y in rel) for name, rel in sorted(model.indist.items())},
    }


def model_from_dict(data: Mapping) -> CielModel:
    """
    Build a model from the model file schema

    Args:
        data: Dictionary with worlds, agents, theory, world_valuation, indist

    Returns:
        CielModel (not validated)
    """
    theory = AgentTheory.from_lines(data.get("theory", []))
    agents = tuple(Agent.from_mapping(entry["name"], entry.get("valuation", {}))
                   for entry in data.get("agents", []))
    for agent in agents:
        for constraint in theory.constraints:
            if not evaluate(constraint, agent.assignment):
                raise ModelValidationError(agent.name, None, f"valuation violates theory constraint {constraint}")
    worlds = tuple(str(w) for w in data["worlds"])
    return CielModel(
        worlds=worlds,
        world_valuation={atom: frozenset(ws) for atom, ws in data.get("world_valuation", {}).items()},
        indist={name: frozenset((x, y) for x, y in pairs) for name, pairs in data.get("indist", {}).items()},
        agent_model=AgentModel(agents=agents, theory=theory),
    )


def to_dot(model: KripkeStructure, name: str = "model") -> str:
    """Graphviz text of the union relation; edges are labelled with agent names"""
    lines = [f"graph {name} {{"]
    for world in model.worlds:
        label = world + ("\\n" + ",".join(model.true_atoms(world)) if model.true_atoms(world) else "")
        lines.append(f'  "{world}" [label="{label}"];')
    edges: Dict[Tuple[str, str], Set[str]] = {}
    for agent, relation in model.indist.items():
        for x, y in relation:
            if x != y:
                edges.setdefault(tuple(sorted((x, y))), set()).add(agent)
    for (x, y), agents in sorted(edges.items()):
        lines.append(f'  "{x}" -- "{y}" [label="{",".join(sorted(agents))}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
