"""
The n x k muddy-children scenario

World atoms p_<j>_<i> say that the bit at row j, column i is set; agent atoms h_<j>_<i>
say that an agent cannot see that bit. Every agent is blind to exactly one bit per
row. Rows and columns are numbered from 1.
"""
import itertools
import logging
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

from ..performance import performance_monitor
from .agentlogic import Agent, AgentTheory, FilteredAgentModel, filtered_model
from .errors import ResourceLimitError
from .formula import (AgentAtom, AgentFalsum, AgentFormula, AgentNot, And, Atom, Common, Not, WorldFormula,
                      conjoin, disjoin, implication)
from .semantics import CielModel, extensions, restrict

logger = logging.getLogger(__name__)

DEFAULT_PUZZLE_WORLD_CAP = 4096
DEFAULT_SUBMODEL_WORLD_CAP = 8

TOP = AgentNot(AgentFalsum())


@dataclass(frozen=True)
class PuzzleSpec:
    """n rows of k bits, with a round counter per row"""
    n: int
    k: int
    rounds: Tuple[int, ...] = ()

    def __post_init__(self):
        if not self.rounds:
            object.__setattr__(self, "rounds", (0,) * self.n)
        if self.n < 1 or self.k < 2:
            raise ValueError(f"need n >= 1 and k >= 2, got n={self.n}, k={self.k}")
        if len(self.rounds) != self.n:
            raise ValueError(f"expected {self.n} round counters, got {len(self.rounds)}")
        for x in self.rounds:
            if not 0 <= x < self.k:
                raise ValueError(f"round counters must lie in [0, {self.k}), got {x}")

    def with_rounds(self, rounds: Sequence[int]) -> "PuzzleSpec":
        return PuzzleSpec(self.n, self.k, tuple(rounds))


def bit_atom(j: int, i: int) -> Atom:
    return Atom(f"p_{j}_{i}")


def blind_atom(j: int, i: int) -> AgentAtom:
    return AgentAtom(f"h_{j}_{i}")


def _positions(spec: PuzzleSpec):
    return [(j, i) for j in range(1, spec.n + 1) for i in range(1, spec.k + 1)]


# ---------------------------------------------------------------------------
# Formulas
# ---------------------------------------------------------------------------

def alpha_leq(j: int, x: int, spec: PuzzleSpec) -> WorldFormula:
    """At most x bits are set in row j, as a disjunction over the sets of set columns"""
    if not 0 <= x <= spec.k:
        raise ValueError(f"x must lie in [0, {spec.k}], got {x}")
    columns = range(1, spec.k + 1)
    disjuncts = []
    for size in range(x + 1):
        for chosen in itertools.combinations(columns, size):
            disjuncts.append(conjoin([bit_atom(j, i) if i in chosen else Not(bit_atom(j, i)) for i in columns]))
    return disjoin(disjuncts)


def visibility_axiom(spec: PuzzleSpec) -> WorldFormula:
    """Common knowledge that every bit is known to the agents who can see it"""
    clauses = []
    for j, i in _positions(spec):
        bit, seeing = bit_atom(j, i), AgentNot(blind_atom(j, i))
        clauses.append(And(implication(bit, Common(seeing, bit)),
                           implication(Not(bit), Common(seeing, Not(bit)))))
    return Common(TOP, conjoin(clauses))


def initial_knowledge(spec: PuzzleSpec) -> WorldFormula:
    """Common knowledge that at least one bit is set in each row"""
    return Common(TOP, conjoin([Not(alpha_leq(j, 0, spec)) for j in range(1, spec.n + 1)]))


def uncertainty_announcement(spec: PuzzleSpec, row: Optional[int] = None) -> WorldFormula:
    """Common knowledge that nobody knows their invisible bit, in one row or in all rows"""
    clauses = []
    for j, i in _positions(spec):
        if row is not None and j != row:
            continue
        bit, blind = bit_atom(j, i), blind_atom(j, i)
        clauses.append(And(Not(Common(blind, bit)), Not(Common(blind, Not(bit)))))
    return Common(TOP, conjoin(clauses))


def invariant_formula(spec: PuzzleSpec) -> WorldFormula:
    """Accumulated common knowledge after the rounds counted in spec"""
    return Common(TOP, conjoin([Not(alpha_leq(j, x, spec)) for j, x in enumerate(spec.rounds, start=1)]))


def round_premises(spec: PuzzleSpec, j: int, drop_uncertainty: bool = False) -> List[WorldFormula]:
    x = spec.rounds[j - 1]
    premises = [visibility_axiom(spec), Common(TOP, Not(alpha_leq(j, x, spec)))]
    if not drop_uncertainty:
        premises.append(uncertainty_announcement(spec, row=j))
    return premises


def round_conclusion(spec: PuzzleSpec, j: int) -> WorldFormula:
    x = spec.rounds[j - 1]
    if x + 1 > spec.k:
        raise ValueError(f"row {j} has already reached {x} rounds")
    return Common(TOP, Not(alpha_leq(j, x + 1, spec)))


# ---------------------------------------------------------------------------
# Puzzle model
# ---------------------------------------------------------------------------

def puzzle_theory(spec: PuzzleSpec) -> AgentTheory:
    """Every agent is blind to exactly one bit per row"""
    constraints = []
    for j in range(1, spec.n + 1):
        row = [blind_atom(j, i) for i in range(1, spec.k + 1)]
        constraints.append(AgentNot(conjoin([AgentNot(h) for h in row], agent=True)))
        for a, b in itertools.combinations(row, 2):
            constraints.append(AgentNot(conjoin([a, b], agent=True)))
    return AgentTheory(frozenset(constraints))


def invisibility_agents(spec: PuzzleSpec) -> FilteredAgentModel:
    """One agent per invisibility type"""
    atoms: List[AgentFormula] = [blind_atom(j, i) for j, i in _positions(spec)]
    return filtered_model(atoms, puzzle_theory(spec), atom_cap=max(len(atoms), 1))


def blind_column(agent: Agent, row: int) -> int:
    for atom, value in agent.valuation:
        if value and atom.startswith(f"h_{row}_"):
            return int(atom.rsplit("_", 1)[1])
    raise ValueError(f"agent {agent.name} has no invisibility index in row {row}")


def world_name(bits: Sequence[Sequence[int]]) -> str:
    return "_".join("".join(str(b) for b in row) for row in bits)


def world_bits(world: str) -> List[List[int]]:
    return [[int(c) for c in row] for row in world.split("_")]


def visible_count(world: str, agent: Agent, row: int) -> int:
    """Number of set bits the agent sees in the given row"""
    bits = world_bits(world)[row - 1]
    blind = blind_column(agent, row)
    return sum(b for i, b in enumerate(bits, start=1) if i != blind)


def build_puzzle_model(spec: PuzzleSpec, world_cap: int = DEFAULT_PUZZLE_WORLD_CAP) -> CielModel:
    """
    All bit matrices as worlds; an agent cannot tell apart matrices that differ only at
    its invisible positions

    Args:
        spec: Puzzle dimensions
        world_cap: Maximum number of worlds

    Returns:
        CielModel whose agent model realizes each invisibility type once
    """
    count = 2 ** (spec.n * spec.k)
    if count > world_cap:
        raise ResourceLimitError("puzzle_worlds", count, world_cap)

    agent_model = invisibility_agents(spec)
    matrices = [[list(bits[r * spec.k:(r + 1) * spec.k]) for r in range(spec.n)]
                for bits in itertools.product((0, 1), repeat=spec.n * spec.k)]
    worlds = tuple(world_name(m) for m in matrices)

    valuation: Dict[str, FrozenSet[str]] = {}
    for j, i in _positions(spec):
        valuation[bit_atom(j, i).name] = frozenset(w for w, m in zip(worlds, matrices) if m[j - 1][i - 1])

    indist = {}
    for agent in agent_model.agents:
        blind = [(j, blind_column(agent, j)) for j in range(1, spec.n + 1)]
        pairs = set()
        for m, w in zip(matrices, worlds):
            for flips in itertools.product((False, True), repeat=spec.n):
                other = [row[:] for row in m]
                for (j, i), flip in zip(blind, flips):
                    if flip:
                        other[j - 1][i - 1] ^= 1
                pairs.add((w, world_name(other)))
        indist[agent.name] = frozenset(pairs)

    logger.info(f"Puzzle model {spec.n}x{spec.k}: {len(worlds)} worlds, {len(agent_model.agents)} agents")
    return CielModel(worlds=worlds, world_valuation=valuation, indist=indist, agent_model=agent_model)


# ---------------------------------------------------------------------------
# Round inference
# ---------------------------------------------------------------------------

def inference_failures(model: CielModel, premises: Sequence[WorldFormula],
                       conclusion: WorldFormula) -> List[str]:
    """Worlds where every premise holds and the conclusion does not"""
    ext = extensions(model, list(premises) + [conclusion])
    return [w for w in model.worlds
            if all(w in ext[p] for p in premises) and w not in ext[conclusion]]


def _scan(model, masks, premises, conclusion):
    for mask in masks:
        worlds = [w for bit, w in enumerate(model.worlds) if mask >> bit & 1]
        failures = inference_failures(restrict(model, worlds), premises, conclusion)
        if failures:
            return mask, tuple(worlds), failures[0]
    return None


def find_round_counterexample(spec: PuzzleSpec, j: int, drop_uncertainty: bool = False,
                              max_workers: int = 1,
                              submodel_cap: int = DEFAULT_SUBMODEL_WORLD_CAP,
                              world_cap: int = DEFAULT_PUZZLE_WORLD_CAP
                              ) -> Optional[Tuple[Tuple[str, ...], str]]:
    """
    Search the puzzle model and its world-restricted submodels for a world where the
    round inference fails

    Submodels are the epistemic states reachable by truthful announcements. The premises
    fail everywhere on the full cube, so a puzzle with more than submodel_cap worlds
    cannot be decided and raises instead of reporting a vacuous success.

    Returns:
        (worlds of the submodel, failing world), or None when the inference holds

    Raises:
        ResourceLimitError: the puzzle model has more than submodel_cap worlds
    """
    model = build_puzzle_model(spec, world_cap)
    premises = round_premises(spec, j, drop_uncertainty)
    conclusion = round_conclusion(spec, j)

    failures = inference_failures(model, premises, conclusion)
    if failures:
        return model.worlds, failures[0]
    if len(model.worlds) > submodel_cap:
        raise ResourceLimitError("submodels", len(model.worlds), submodel_cap)

    masks = list(range(1, 2 ** len(model.worlds)))
    found = []
    with performance_monitor.track("puzzle_scan", worlds_scanned=len(masks)):
        if max_workers > 1:
            chunks = [masks[i::max_workers] for i in range(max_workers)]
            with ThreadPoolExecutor(max_workers=max_workers) as executor:
                futures = {executor.submit(_scan, model, chunk, premises, conclusion): n
                           for n, chunk in enumerate(chunks)}
                for future in as_completed(futures):
                    result = future.result()
                    if result is not None:
                        found.append(result)
        else:
            result = _scan(model, masks, premises, conclusion)
            if result is not None:
                found.append(result)

    if not found:
        return None
    _, worlds, world = min(found)
    logger.info(f"Round inference for row {j} fails at {world} in a submodel of {len(worlds)} worlds")
    return worlds, world


def check_round_inference(spec: PuzzleSpec, j: int, drop_uncertainty: bool = False,
                          max_workers: int = 1, submodel_cap: int = DEFAULT_SUBMODEL_WORLD_CAP,
                          world_cap: int = DEFAULT_PUZZLE_WORLD_CAP) -> bool:
    """Does querying row j turn the accumulated knowledge into knowledge of one more set bit?"""
    counterexample = find_round_counterexample(spec, j, drop_uncertainty, max_workers, submodel_cap, world_cap)
    return counterexample is None
