"""
Propositional agent logic for the CIEL reasoning toolkit

Agents are truth valuations of agent atoms. A background theory restricts which
valuations count as agents, and the filtered agent model keeps one representative
per class of valuations that satisfy the same agent formulas of interest.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, Mapping, Optional, Sequence, Tuple

import numpy as np

from .errors import ResourceLimitError, UnsatisfiableTheoryError
from .formula import (AgentAnd, AgentAtom, AgentFalsum, AgentFormula, AgentNot,
                      conjoin, formula_key, parse_agent, subformulae)

logger = logging.getLogger(__name__)

DEFAULT_AGENT_ATOM_CAP = 20


@dataclass(frozen=True)
class AgentTheory:
    """Agent formulas that hold of every agent"""
    constraints: FrozenSet[AgentFormula] = frozenset()

    @classmethod
    def from_lines(cls, lines: Iterable[str]) -> "AgentTheory":
        """
        Build a theory from theory-file lines

        Args:
            lines: One agent formula per line; '#' starts a comment

        Returns:
            AgentTheory (not yet checked for satisfiability)
        """
        constraints = []
        for raw in lines:
            text = raw.split("#", 1)[0].strip()
            if text:
                constraints.append(parse_agent(text))
        return cls(frozenset(constraints))

    @property
    def atoms(self):
        return {sub.name for c in self.constraints for sub in subformulae(c)
                if isinstance(sub, AgentAtom)}

    def texts(self):
        return sorted(str(c) for c in self.constraints)


def load_theory(path: str) -> AgentTheory:
    """Read a theory file and check that it is satisfiable"""
    with open(path, "r", encoding="utf-8") as f:
        theory = AgentTheory.from_lines(f)
    if not sat_agent([], theory):
        raise UnsatisfiableTheoryError(f"theory in {path} has no model")
    logger.info(f"Loaded theory with {len(theory.constraints)} constraints from {path}")
    return theory


@dataclass(frozen=True)
class Agent:
    """A named truth valuation of agent atoms; atoms outside its domain are false"""
    name: str
    valuation: Tuple[Tuple[str, bool], ...] = ()

    @classmethod
    def from_mapping(cls, name: str, valuation: Mapping[str, bool]) -> "Agent":
        return cls(name, tuple(sorted((atom, bool(v)) for atom, v in valuation.items())))

    @property
    def assignment(self) -> Dict[str, bool]:
        return dict(self.valuation)

    def value(self, atom: str) -> bool:
        return self.assignment.get(atom, False)

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class AgentModel:
    """A finite agent model: the agents the index formulas range over"""
    agents: Tuple[Agent, ...]
    theory: AgentTheory = AgentTheory()

    def by_name(self, name: str) -> Agent:
        for agent in self.agents:
            if agent.name == name:
                return agent
        raise KeyError(name)

    @property
    def names(self):
        return [agent.name for agent in self.agents]

    @property
    def atoms(self):
        return sorted({atom for agent in self.agents for atom, _ in agent.valuation})


@dataclass(frozen=True)
class FilteredAgentModel(AgentModel):
    """Agent model realizing every theory-satisfiable type over sigma_ag exactly once"""
    sigma_ag: FrozenSet[AgentFormula] = frozenset()
    characteristics: Tuple[Tuple[str, AgentFormula], ...] = field(default=())

    def characteristic_of(self, agent: Agent) -> AgentFormula:
        return dict(self.characteristics)[agent.name]


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

def evaluate(formula: AgentFormula, assignment: Mapping[str, bool]) -> bool:
    """Truth of an agent formula under a valuation (absent atoms are false)"""
    if isinstance(formula, AgentFalsum):
        return False
    if isinstance(formula, AgentAtom):
        return bool(assignment.get(formula.name, False))
    if isinstance(formula, AgentNot):
        return not evaluate(formula.sub, assignment)
    if isinstance(formula, AgentAnd):
        return evaluate(formula.left, assignment) and evaluate(formula.right, assignment)
    raise TypeError(f"not an agent formula: {formula!r}")


def truth_table(atom_names: Sequence[str]) -> np.ndarray:
    """All valuations of atom_names, in lexicographic order with false before true"""
    n = len(atom_names)
    rows = np.arange(2 ** n, dtype=np.int64)
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
    return ((rows[:, None] >> shifts[None, :]) & 1).astype(bool)


def evaluate_table(formula: AgentFormula, table: np.ndarray, columns: Mapping[str, int]) -> np.ndarray:
    """Vectorized truth of formula over every row of a truth table"""
    if isinstance(formula, AgentFalsum):
        return np.zeros(table.shape[0], dtype=bool)
    if isinstance(formula, AgentAtom):
        if formula.name not in columns:
            return np.zeros(table.shape[0], dtype=bool)
        return table[:, columns[formula.name]]
    if isinstance(formula, AgentNot):
        return ~evaluate_table(formula.sub, table, columns)
    if isinstance(formula, AgentAnd):
        return evaluate_table(formula.left, table, columns) & evaluate_table(formula.right, table, columns)
    raise TypeError(f"not an agent formula: {formula!r}")


def _valuation_space(formulas: Iterable[AgentFormula], theory: Optional[AgentTheory], atom_cap: int):
    theory = theory or AgentTheory()
    names = set(theory.atoms)
    for formula in formulas:
        names |= {sub.name for sub in subformulae(formula) if isinstance(sub, AgentAtom)}
    names = sorted(names)
    if len(names) > atom_cap:
        raise ResourceLimitError("agent_atoms", len(names), atom_cap)
    table = truth_table(names)
    columns = {name: i for i, name in enumerate(names)}
    admissible = np.ones(table.shape[0], dtype=bool)
    for constraint in theory.constraints:
        admissible &= evaluate_table(constraint, table, columns)
    return names, table, columns, admissible


def sat_agent(formulas: Iterable[AgentFormula], theory: Optional[AgentTheory] = None,
              atom_cap: int = DEFAULT_AGENT_ATOM_CAP) -> bool:
    """Is there a theory-satisfying valuation making every formula true?"""
    formulas = list(formulas)
    _, table, columns, admissible = _valuation_space(formulas, theory, atom_cap)
    for formula in formulas:
        admissible &= evaluate_table(formula, table, columns)
    return bool(admissible.any())


def entails(premise: AgentFormula, conclusion: AgentFormula, theory: Optional[AgentTheory] = None,
            atom_cap: int = DEFAULT_AGENT_ATOM_CAP) -> bool:
    """Semantic consequence over theory-satisfying valuations"""
    return not sat_agent([premise, AgentNot(conclusion)], theory, atom_cap)


# ---------------------------------------------------------------------------
# Filtered agent model
# ---------------------------------------------------------------------------

def agent_name(bits: Sequence[bool]) -> str:
    if not len(bits):
        return "a"
    return "a_" + "".join("1" if b else "0" for b in bits)


def filtered_model(sigma_ag: Iterable[AgentFormula], theory: Optional[AgentTheory] = None,
                   atom_cap: int = DEFAULT_AGENT_ATOM_CAP) -> FilteredAgentModel:
    """
    Build the filtered agent model for a set of agent formulas

    Valuations over the atoms of sigma_ag and the theory are grouped by the subset of
    sigma_ag they satisfy; the lexicographically least valuation of each class is kept.

    Args:
        sigma_ag: Agent formulas (closed under subformulas here if the caller did not)
        theory: Background theory
        atom_cap: Maximum number of atoms to enumerate valuations over

    Returns:
        FilteredAgentModel with characteristic formulas
    """
    theory = theory or AgentTheory()
    sigma = set()
    for formula in sigma_ag:
        sigma |= subformulae(formula)
    ordered = sorted(sigma, key=formula_key)

    names, table, columns, admissible = _valuation_space(ordered, theory, atom_cap)
    if not admissible.any():
        raise UnsatisfiableTheoryError("background theory has no satisfying valuation")

    rows = np.flatnonzero(admissible)
    if ordered:
        signatures = np.stack([evaluate_table(f, table, columns)[rows] for f in ordered], axis=1)
        _, first = np.unique(signatures, axis=0, return_index=True)
        representatives = rows[np.sort(first)]
    else:
        representatives = rows[:1]

    sigma_atoms = sorted(f.name for f in ordered if isinstance(f, AgentAtom))
    agents = []
    characteristics = []
    for row in representatives:
        bits = table[row]
        agent = Agent(agent_name(bits), tuple((name, bool(bits[i])) for i, name in enumerate(names)))
        literals = [AgentAtom(atom) if bits[columns[atom]] else AgentNot(AgentAtom(atom))
                    for atom in sigma_atoms]
        agents.append(agent)
        characteristics.append((agent.name, conjoin(literals, agent=True)))

    logger.debug(f"Filtered agent model: {len(agents)} agents over {len(names)} atoms")
    return FilteredAgentModel(agents=tuple(agents), theory=theory, sigma_ag=frozenset(sigma),
                              characteristics=tuple(characteristics))


def denote(formula: AgentFormula, model: AgentModel) -> FrozenSet[Agent]:
    """The set of agents of model satisfying formula"""
    return frozenset(agent for agent in model.agents if evaluate(formula, agent.assignment))


def characteristic(agent: Agent, model: FilteredAgentModel) -> AgentFormula:
    """Agent formula denoting exactly {agent} in model"""
    return model.characteristic_of(agent)


def clo_ag(sigma_ag: Iterable[AgentFormula], model: FilteredAgentModel) -> FrozenSet[AgentFormula]:
    """sigma_ag together with the characteristic formula of every agent"""
    return frozenset(sigma_ag) | frozenset(formula for _, formula in model.characteristics)
