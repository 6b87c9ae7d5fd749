"""
Seeded generators for formulas and models, and the randomized soundness suite
"""
import logging
from typing import Dict, Iterator, List, Optional, Sequence

import numpy as np
import pandas as pd

from .agentlogic import Agent, AgentModel, entails
from .formula import (AgentAnd, AgentAtom, AgentFalsum, AgentFormula, AgentNot, And, Atom, Common,
                      Falsum, GroupCommon, Not, WorldFormula, size)
from .mucalc import EDGE, PI1, PI2, MuModel
from .proofs import ax_4, ax_5, ax_bot, ax_ind, ax_k, ax_t, am_conclusion
from .semantics import CielModel, GelModel, extension

logger = logging.getLogger(__name__)

WORLD_ATOMS = ("p", "q")
AGENT_ATOMS = ("r", "s", "u")
GEL_NAMES = ("a", "b")
AXIOM_SCHEMATA = ("T", "Bot", "K", "4", "5", "Ind")
RULE_SCHEMATA = ("Nec", "AM")


def make_rng(seed: Optional[int] = None) -> np.random.Generator:
    return np.random.default_rng(seed)


def _pick(rng, items):
    return items[int(rng.integers(len(items)))]


# ---------------------------------------------------------------------------
# Formulas
# ---------------------------------------------------------------------------

def random_agent_formula(rng: np.random.Generator, atoms: Sequence[str] = AGENT_ATOMS,
                         depth: int = 2) -> AgentFormula:
    """Random propositional agent formula of depth at most depth"""
    if depth <= 0 or rng.random() < 0.35:
        return AgentFalsum() if rng.random() < 0.05 else AgentAtom(_pick(rng, atoms))
    if rng.random() < 0.4:
        return AgentNot(random_agent_formula(rng, atoms, depth - 1))
    return AgentAnd(random_agent_formula(rng, atoms, depth - 1), random_agent_formula(rng, atoms, depth - 1))


def random_world_formula(rng: np.random.Generator, atoms: Sequence[str] = WORLD_ATOMS,
                         agent_atoms: Sequence[str] = AGENT_ATOMS, depth: int = 3,
                         index_depth: int = 1) -> WorldFormula:
    """Random CIEL formula whose syntax tree (indices aside) has depth at most depth"""
    if depth <= 0 or rng.random() < 0.25:
        return Falsum() if rng.random() < 0.05 else Atom(_pick(rng, atoms))
    roll = rng.random()
    if roll < 0.3:
        return Not(random_world_formula(rng, atoms, agent_atoms, depth - 1, index_depth))
    if roll < 0.6:
        return And(random_world_formula(rng, atoms, agent_atoms, depth - 1, index_depth),
                   random_world_formula(rng, atoms, agent_atoms, depth - 1, index_depth))
    return Common(random_agent_formula(rng, agent_atoms, index_depth),
                  random_world_formula(rng, atoms, agent_atoms, depth - 1, index_depth))


def random_common_formula(rng: np.random.Generator, atoms: Sequence[str] = WORLD_ATOMS,
                          agent_atoms: Sequence[str] = AGENT_ATOMS, depth: int = 3) -> Common:
    return Common(random_agent_formula(rng, agent_atoms, 1),
                  random_world_formula(rng, atoms, agent_atoms, depth - 1))


def random_gel_formula(rng: np.random.Generator, atoms: Sequence[str] = WORLD_ATOMS,
                       names: Sequence[str] = GEL_NAMES, depth: int = 2) -> WorldFormula:
    if depth <= 0 or rng.random() < 0.25:
        return Atom(_pick(rng, atoms))
    roll = rng.random()
    if roll < 0.3:
        return Not(random_gel_formula(rng, atoms, names, depth - 1))
    if roll < 0.6:
        return And(random_gel_formula(rng, atoms, names, depth - 1),
                   random_gel_formula(rng, atoms, names, depth - 1))
    group = frozenset(n for n in names if rng.random() < 0.5) or frozenset([_pick(rng, names)])
    return GroupCommon(group, random_gel_formula(rng, atoms, names, depth - 1))


def gel_corpus(names: Sequence[str] = GEL_NAMES, atoms: Sequence[str] = WORLD_ATOMS,
               max_size: int = 5, max_depth: int = 2) -> Iterator[WorldFormula]:
    """
    Every GEL formula up to max_size nodes and modal depth max_depth

    Double negations are skipped. Group members count as nodes.
    """
    groups = [frozenset(g) for k in range(1, len(names) + 1)
              for g in _combinations(sorted(names), k)]
    # by_size[s][d]: formulas of size s and modal depth d
    by_size: Dict[int, Dict[int, List[WorldFormula]]] = {1: {0: [Falsum()] + [Atom(a) for a in atoms]}}
    for s in range(2, max_size + 1):
        level: Dict[int, List[WorldFormula]] = {}
        for d, formulas in by_size.get(s - 1, {}).items():
            level.setdefault(d, []).extend(Not(f) for f in formulas if not isinstance(f, Not))
        for left_size in range(1, s - 1):
            right_size = s - 1 - left_size
            for dl, lefts in by_size.get(left_size, {}).items():
                for dr, rights in by_size.get(right_size, {}).items():
                    level.setdefault(max(dl, dr), []).extend(And(l, r) for l in lefts for r in rights)
        for group in groups:
            body_size = s - 1 - len(group)
            for d, bodies in by_size.get(body_size, {}).items():
                if d + 1 <= max_depth:
                    level.setdefault(d + 1, []).extend(GroupCommon(group, b) for b in bodies)
        by_size[s] = level
    for s in sorted(by_size):
        for d in sorted(by_size[s]):
            yield from by_size[s][d]


def _combinations(items, k):
    if k == 0:
        yield ()
        return
    for i, item in enumerate(items):
        for rest in _combinations(items[i + 1:], k - 1):
            yield (item,) + rest


# ---------------------------------------------------------------------------
# Models
# ---------------------------------------------------------------------------

def random_partition(rng: np.random.Generator, worlds: Sequence[str]) -> frozenset:
    """Equivalence relation from a random block labelling"""
    blocks = rng.integers(0, max(1, len(worlds)), size=len(worlds))
    return frozenset((x, y) for x, bx in zip(worlds, blocks) for y, by in zip(worlds, blocks) if bx == by)


def _random_valuation(rng, worlds, atoms):
    return {atom: frozenset(w for w in worlds if rng.random() < 0.5) for atom in atoms}


def random_ciel_model(rng: np.random.Generator, max_worlds: int = 8, max_agents: int = 4,
                      atoms: Sequence[str] = WORLD_ATOMS, agent_atoms: Sequence[str] = AGENT_ATOMS) -> CielModel:
    """Random model with equivalence relations and agents given by random valuations"""
    worlds = tuple(f"w{i}" for i in range(int(rng.integers(1, max_worlds + 1))))
    agents = tuple(Agent.from_mapping(f"g{i}", {atom: bool(rng.random() < 0.5) for atom in agent_atoms})
                   for i in range(int(rng.integers(1, max_agents + 1))))
    return CielModel(worlds=worlds, world_valuation=_random_valuation(rng, worlds, atoms),
                     indist={a.name: random_partition(rng, worlds) for a in agents},
                     agent_model=AgentModel(agents=agents))


def random_gel_model(rng: np.random.Generator, max_worlds: int = 6, names: Sequence[str] = GEL_NAMES,
                     atoms: Sequence[str] = WORLD_ATOMS) -> GelModel:
    worlds = tuple(f"w{i}" for i in range(int(rng.integers(1, max_worlds + 1))))
    return GelModel(worlds=worlds, world_valuation=_random_valuation(rng, worlds, atoms),
                    indist={n: random_partition(rng, worlds) for n in names}, named_agents=tuple(names))


def random_mu_model(rng: np.random.Generator, max_size: int = 6, atoms: Sequence[str] = WORLD_ATOMS + AGENT_ATOMS[:1],
                    density: float = 0.25) -> MuModel:
    """Random mu-model interpreting edge, pi1 and pi2"""
    domain = tuple(f"x{i}" for i in range(int(rng.integers(1, max_size + 1))))
    transitions = {
        program: frozenset((x, y) for x in domain for y in domain if rng.random() < density)
        for program in (EDGE, PI1, PI2)
    }
    return MuModel(domain=domain, transitions=transitions, valuation=_random_valuation(rng, domain, atoms))


# ---------------------------------------------------------------------------
# Axiom instances and the soundness suite
# ---------------------------------------------------------------------------

def _entailed_pair(rng, agent_atoms, depth):
    """(narrow, wide) with narrow entailing wide"""
    wide = random_agent_formula(rng, agent_atoms, depth)
    narrow = AgentAnd(wide, random_agent_formula(rng, agent_atoms, depth))
    return narrow, wide


def axiom_instance(schema: str, rng: np.random.Generator, depth: int = 3,
                   atoms: Sequence[str] = WORLD_ATOMS, agent_atoms: Sequence[str] = AGENT_ATOMS,
                   index_depth: int = 1) -> WorldFormula:
    """
    A random valid formula for an axiom schema or rule

    Nec yields C[psi] of a T-instance and AM the implication C[wide] phi -> C[narrow] phi.
    """
    def phi():
        return random_world_formula(rng, atoms, agent_atoms, depth, index_depth)

    def psi():
        return random_agent_formula(rng, agent_atoms, index_depth)

    if schema == "T":
        return ax_t(psi(), phi())
    if schema == "Bot":
        return ax_bot(phi())
    if schema == "K":
        return ax_k(psi(), phi(), phi())
    if schema == "4":
        return ax_4(psi(), phi())
    if schema == "5":
        return ax_5(psi(), phi())
    if schema == "Ind":
        return ax_ind(psi(), psi(), phi())
    if schema == "Nec":
        return Common(psi(), ax_t(psi(), phi()))
    if schema == "AM":
        narrow, wide = _entailed_pair(rng, agent_atoms, index_depth)
        return am_conclusion(narrow, wide, phi())
    raise ValueError(f"unknown schema {schema!r}")


def holds_everywhere(model: CielModel, formula: WorldFormula) -> bool:
    return extension(model, formula) == model.world_set


def _rule_violated(schema, rng, models, depth):
    """Counts models where a rule leads from truth everywhere to a false conclusion"""
    if schema == "Nec":
        premise = random_world_formula(rng, depth=depth)
        conclusion = Common(random_agent_formula(rng), premise)
        return premise, sum(1 for m in models if holds_everywhere(m, premise)
                            and not holds_everywhere(m, conclusion))
    narrow, wide = _entailed_pair(rng, AGENT_ATOMS, 1)
    if not entails(narrow, wide):
        raise AssertionError("generated AM side condition does not hold")
    formula = am_conclusion(narrow, wide, random_world_formula(rng, depth=depth))
    return formula, sum(1 for m in models if not holds_everywhere(m, formula))


def run_soundness_suite(instances: int = 200, models: int = 50, seed: int = 0,
                        depth: int = 3, schemata: Sequence[str] = AXIOM_SCHEMATA + RULE_SCHEMATA) -> List[dict]:
    """
    Model-check random instances of every schema and rule on random models

    Args:
        instances: Instances per schema
        models: Random models each instance is checked on
        seed: Seed for formulas and models
        depth: Depth of the instantiated formulas
        schemata: Schema and rule names

    Returns:
        One record per (schema, instance) with the number of countermodels found
    """
    rng = make_rng(seed)
    pool = [random_ciel_model(rng) for _ in range(models)]
    records = []
    for schema in schemata:
        for n in range(instances):
            if schema in RULE_SCHEMATA:
                formula, countermodels = _rule_violated(schema, rng, pool, depth)
            else:
                formula = axiom_instance(schema, rng, depth)
                countermodels = sum(1 for m in pool if not holds_everywhere(m, formula))
            records.append({"schema": schema, "instance": n, "size": size(formula),
                            "formula": str(formula), "models": len(pool), "countermodels": countermodels})
        logger.info(f"Soundness suite: {schema} checked on {instances} instances")
    return records


def summarize_soundness(records: List[dict]) -> pd.DataFrame:
    """Per-schema totals of a soundness run"""
    frame = pd.DataFrame(records, columns=["schema", "instance", "size", "formula", "models", "countermodels"])
    return (frame.groupby("schema", sort=False)
            .agg(instances=("instance", "count"), max_size=("size", "max"),
                 countermodels=("countermodels", "sum"))
            .reset_index())
