"""
Translations between group epistemic logic (GEL) and CIEL

GEL formulas use C{a,b} over explicit nonempty groups. gel_to_ciel replaces each
group by a disjunction of fresh agent atoms p_<name>; ciel_to_gel replaces each
index by the set of agents it denotes in a finite agent model.
"""
import logging
from typing import FrozenSet, Iterable, Sequence

from .agentlogic import Agent, AgentModel, FilteredAgentModel, denote
from .errors import EmptyGroupError, FormulaSyntaxError, MissingAgentAtomError, ReservedNameError
from .formula import (AgentAtom, And, Atom, Common, Falsum, GroupCommon, Not, WorldFormula,
                      disjoin, parse_any, size, subformulae, to_text)
from .semantics import CielModel, GelModel

logger = logging.getLogger(__name__)

GelFormula = WorldFormula


def parse_gel(text: str) -> GelFormula:
    """Parse a GEL formula; groups are written C{alice,bob}"""
    formula = parse_any(text)
    for sub in subformulae(formula):
        if isinstance(sub, Common):
            raise FormulaSyntaxError("indexed C[...] is CIEL syntax, not GEL")
        if isinstance(sub, GroupCommon) and not sub.group:
            raise FormulaSyntaxError("GEL groups must be nonempty")
    return formula


def agent_atom_for(name: str) -> str:
    return f"p_{name}"


def group_names(formula: GelFormula) -> FrozenSet[str]:
    return frozenset(n for sub in subformulae(formula) if isinstance(sub, GroupCommon) for n in sub.group)


def gel_size(formula: GelFormula) -> int:
    """Node count; every group member counts as one node"""
    return size(formula)


def gel_to_ciel(formula: GelFormula, reserved_atoms: Iterable[str] = ()) -> WorldFormula:
    """
    The encoding q: C{G} phi becomes C[p_a | p_b | ...] q(phi)

    Args:
        formula: GEL formula
        reserved_atoms: Agent atoms already in use, which fresh atoms must avoid

    Returns:
        CIEL world formula
    """
    reserved = set(reserved_atoms)
    clashes = sorted(agent_atom_for(n) for n in group_names(formula) if agent_atom_for(n) in reserved)
    if clashes:
        raise ReservedNameError(f"fresh agent atoms collide with existing atoms: {', '.join(clashes)}")
    return _q(formula)


def _q(formula):
    if isinstance(formula, (Falsum, Atom)):
        return formula
    if isinstance(formula, Not):
        return Not(_q(formula.sub))
    if isinstance(formula, And):
        return And(_q(formula.left), _q(formula.right))
    if isinstance(formula, GroupCommon):
        if not formula.group:
            raise EmptyGroupError("{}")
        index = disjoin([AgentAtom(agent_atom_for(n)) for n in sorted(formula.group)], agent=True)
        return Common(index, _q(formula.body))
    raise TypeError(f"not a GEL formula: {formula!r}")


def gel_model_to_ciel(model: GelModel) -> CielModel:
    """One CIEL agent per GEL name, with p_a true of exactly the agent a"""
    names = sorted(model.named_agents)
    agents = tuple(Agent.from_mapping(n, {agent_atom_for(m): m == n for m in names}) for n in names)
    return CielModel(worlds=model.worlds, world_valuation=model.world_valuation,
                     indist={n: model.indist.get(n, frozenset()) for n in names},
                     agent_model=AgentModel(agents=agents))


def ciel_model_to_gel(model: CielModel, names: Sequence[str]) -> GelModel:
    """
    GEL model whose agent a sees the group closure of the CIEL agents satisfying p_a

    Args:
        model: CIEL model interpreting every p_<name>
        names: GEL agent names

    Returns:
        GelModel
    """
    domain = set(model.agent_model.atoms)
    indist = {}
    for name in names:
        atom = agent_atom_for(name)
        if atom not in domain:
            raise MissingAgentAtomError(f"agent atom {atom} is not interpreted by the agent model")
        members = [a.name for a in denote(AgentAtom(atom), model.agent_model)]
        indist[name] = frozenset((x, y) for x in model.worlds for y in model.reach(members, x))
    return GelModel(worlds=model.worlds, world_valuation=model.world_valuation,
                    indist=indist, named_agents=tuple(names))


def ciel_to_gel(formula: WorldFormula, agent_model: FilteredAgentModel) -> GelFormula:
    """
    The map s: C[psi] chi becomes C{agents denoted by psi} s(chi)

    Group sizes can be exponential in the number of agent atoms.
    """
    if isinstance(formula, (Falsum, Atom)):
        return formula
    if isinstance(formula, Not):
        return Not(ciel_to_gel(formula.sub, agent_model))
    if isinstance(formula, And):
        return And(ciel_to_gel(formula.left, agent_model), ciel_to_gel(formula.right, agent_model))
    if isinstance(formula, Common):
        group = frozenset(a.name for a in denote(formula.index, agent_model))
        if not group:
            raise EmptyGroupError(to_text(formula.index, sugar=True))
        return GroupCommon(group, ciel_to_gel(formula.body, agent_model))
    raise TypeError(f"not a CIEL formula: {formula!r}")


def ciel_model_as_gel(model: CielModel) -> GelModel:
    """The GEL reading of a CIEL model: same relations, agents named as in the model"""
    names = tuple(model.agent_model.names)
    return GelModel(worlds=model.worlds, world_valuation=model.world_valuation,
                    indist={n: model.indist.get(n, frozenset()) for n in names}, named_agents=names)
