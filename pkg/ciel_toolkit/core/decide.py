"""
Satisfiability and validity for CIEL by type elimination

The closure of the input formula is enumerated into coherent types, stored as rows of
a boolean matrix over its positive members (falsum, atoms, conjunctions and
C-formulas); a negation is a member exactly when its argument is not. Types are
linked per agent when they agree on every C-formula whose index the agent satisfies,
and types with an unfulfillable obligation ~C[psi] phi are deleted until nothing
changes. Surviving types form the witness model.

An independent GEL oracle (gel_sat) runs the same idea over explicit groups with
a plain breadth-first search.
"""
import itertools
import logging
from collections import deque
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field, replace
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from ..performance import performance_monitor
from .agentlogic import (DEFAULT_AGENT_ATOM_CAP, AgentTheory, FilteredAgentModel, clo_ag, denote,
                         filtered_model)
from .errors import ResourceLimitError
from .formula import (DEFAULT_CLOSURE_CAP, And, Atom, ClosureSet, Common, Falsum, GroupCommon, Not,
                      WorldFormula, agent_subformulae, closure, formula_key, nneg)
from .semantics import CielModel, PseudoModel, extensions

logger = logging.getLogger(__name__)


@dataclass
class DecisionLimits:
    """Resource caps for the decision procedure"""
    closure_cap: int = DEFAULT_CLOSURE_CAP
    sigma_cap: int = 256
    type_cap: int = 2 ** 20
    agent_atom_cap: int = DEFAULT_AGENT_ATOM_CAP
    gel_position_cap: int = 20
    witness_pair_cap: int = 2_000_000

    @classmethod
    def from_config(cls, config) -> "DecisionLimits":
        """The decision caps out of a ConfigManager's limits section"""
        return cls(**{name: getattr(config.limits, name) for name in cls.__dataclass_fields__})


# ---------------------------------------------------------------------------
# Type space
# ---------------------------------------------------------------------------

@dataclass
class TypeSpace:
    """
    Coherent types of a closure set

    matrix[i, j] is the membership of columns[j] in type i; labels[a][i] is the
    equivalence class of type i for agent a; alive marks surviving types.
    """
    sigma: ClosureSet
    agent_model: FilteredAgentModel
    columns: Tuple[WorldFormula, ...]
    matrix: np.ndarray
    denotations: Dict[WorldFormula, FrozenSet[str]]
    labels: Dict[str, np.ndarray]
    alive: np.ndarray
    rounds: int = 0

    def __post_init__(self):
        self.column_index = {formula: i for i, formula in enumerate(self.columns)}

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    @property
    def surviving(self) -> np.ndarray:
        return np.flatnonzero(self.alive)

    @property
    def common_formulas(self) -> List[Common]:
        return [f for f in self.columns if isinstance(f, Common)]

    def values(self, formula: WorldFormula) -> np.ndarray:
        """Membership of a closure formula in every type"""
        if isinstance(formula, Falsum):
            return np.zeros(self.size, dtype=bool)
        if isinstance(formula, Not):
            return ~self.values(formula.sub)
        return self.matrix[:, self.column_index[formula]]

    def members(self, row: int) -> FrozenSet[WorldFormula]:
        return frozenset(f for f in self.sigma if self.values(f)[row])

    def components(self, names: Sequence[str], alive: Optional[np.ndarray] = None) -> np.ndarray:
        """
        Connected components of the surviving types under the named agents' links

        Returns:
            Component id per type, -1 for deleted types
        """
        alive = self.alive if alive is None else alive
        idx = np.flatnonzero(alive)
        n = len(idx)
        rows, cols = [], []
        offset = n
        for name in sorted(names):
            _, inverse = np.unique(self.labels[name][idx], return_inverse=True)
            inverse = inverse.reshape(-1)
            rows.append(np.arange(n))
            cols.append(offset + inverse)
            offset += int(inverse.max()) + 1 if n else 0
        r = np.concatenate(rows) if rows else np.zeros(0, dtype=np.int64)
        c = np.concatenate(cols) if cols else np.zeros(0, dtype=np.int64)
        graph = coo_matrix((np.ones(len(r), dtype=np.int8), (r, c)), shape=(offset, offset)).tocsr()
        _, labels = connected_components(graph, directed=False)
        result = np.full(self.size, -1, dtype=np.int64)
        result[idx] = labels[:n]
        return result

    def obligation_groups(self) -> Dict[FrozenSet[str], List[Common]]:
        """C-formulas of the closure keyed by the nonempty agent set their index denotes"""
        groups: Dict[FrozenSet[str], List[Common]] = {}
        for formula in self.common_formulas:
            group = self.denotations[formula]
            if group:
                groups.setdefault(group, []).append(formula)
        return groups

    def unfulfilled(self, group: FrozenSet[str], formulas: Sequence[Common], alive: np.ndarray) -> np.ndarray:
        """Surviving types holding some ~C[psi] phi with no reachable type refuting phi"""
        doomed = np.zeros(self.size, dtype=bool)
        if not alive.any():
            return doomed
        comp = self.components(group, alive)
        count = int(comp.max()) + 1
        for formula in formulas:
            refuting = alive & ~self.values(formula.body)
            has_refuter = np.zeros(count, dtype=bool)
            has_refuter[comp[refuting]] = True
            doomed |= alive & ~self.values(formula) & ~has_refuter[np.maximum(comp, 0)]
        return doomed

    def truth(self, formula: WorldFormula) -> np.ndarray:
        """Truth of formula at every surviving type, read off the type space as a model"""
        if isinstance(formula, Falsum):
            return np.zeros(self.size, dtype=bool)
        if isinstance(formula, Atom):
            return self.values(formula).copy()
        if isinstance(formula, Not):
            return ~self.truth(formula.sub)
        if isinstance(formula, And):
            return self.truth(formula.left) & self.truth(formula.right)
        if isinstance(formula, Common):
            comp = self.components(self.denotations.get(formula) or self._denote(formula), self.alive)
            failing = self.alive & ~self.truth(formula.body)
            count = max(int(comp.max()) + 1, 1)
            has_failure = np.zeros(count, dtype=bool)
            has_failure[comp[failing]] = True
            return ~has_failure[np.maximum(comp, 0)]
        raise TypeError(f"not a CIEL formula: {formula!r}")

    def _denote(self, formula: Common) -> FrozenSet[str]:
        return frozenset(a.name for a in denote(formula.index, self.agent_model))


def _ideals(denotations: Sequence[FrozenSet[str]], cap: int) -> np.ndarray:
    """All down-closed families of denotations, which are sorted by size"""
    results = []
    stack = [()]
    while stack:
        chosen = stack.pop()
        pos = len(chosen)
        if pos == len(denotations):
            results.append(chosen)
            if len(results) > cap:
                raise ResourceLimitError("types", len(results), cap)
            continue
        current = denotations[pos]
        stack.append(chosen + (False,))
        if all(chosen[i] for i in range(pos) if denotations[i] < current):
            stack.append(chosen + (True,))
    return np.array(results, dtype=bool).reshape(len(results), len(denotations))


def enumerate_types(sigma: ClosureSet, agent_model: FilteredAgentModel,
                    cap: int = 2 ** 20) -> TypeSpace:
    """
    Enumerate all coherent types of sigma

    Formulas are decided in size order. Atoms branch freely, conjunctions follow their
    conjuncts, and the C-formulas sharing a body are decided together: all false when
    the body is false, otherwise any down-closed family of their (nonempty) index
    denotations may hold, and an empty-denotation C-formula equals its body.

    Args:
        sigma: Closure set
        agent_model: Filtered agent model interpreting the indices
        cap: Maximum number of types

    Returns:
        TypeSpace with per-agent links and every type alive
    """
    denotations = {f: frozenset(a.name for a in denote(f.index, agent_model))
                   for f in sigma if isinstance(f, Common)}
    by_body: Dict[WorldFormula, List[Common]] = {}
    for formula in sigma.common_formulas:
        by_body.setdefault(formula.body, []).append(formula)

    columns: List[WorldFormula] = []
    index: Dict[WorldFormula, int] = {}
    matrix = np.ones((1, 0), dtype=bool)

    def values(formula):
        if isinstance(formula, Falsum):
            return np.zeros(matrix.shape[0], dtype=bool)
        if isinstance(formula, Not):
            return ~values(formula.sub)
        return matrix[:, index[formula]]

    def append(formula, column):
        nonlocal matrix
        index[formula] = len(columns)
        columns.append(formula)
        matrix = np.concatenate([matrix, column.reshape(-1, 1)], axis=1)

    for formula in sigma:
        if formula in index or isinstance(formula, (Falsum, Not)):
            continue
        rows = matrix.shape[0]
        if isinstance(formula, Atom):
            if 2 * rows > cap:
                raise ResourceLimitError("types", 2 * rows, cap)
            matrix = np.repeat(matrix, 2, axis=0)
            append(formula, np.tile(np.array([False, True]), rows))
        elif isinstance(formula, And):
            append(formula, values(formula.left) & values(formula.right))
        elif isinstance(formula, Common):
            members = by_body[formula.body]
            distinct = sorted({denotations[f] for f in members if denotations[f]},
                              key=lambda d: (len(d), sorted(d)))
            ideals = _ideals(distinct, cap)
            body = values(formula.body)
            true_rows, false_rows = matrix[body], matrix[~body]
            total = len(false_rows) + len(true_rows) * len(ideals)
            if total > cap:
                raise ResourceLimitError("types", total, cap)
            matrix = np.concatenate([np.repeat(true_rows, len(ideals), axis=0), false_rows], axis=0)
            choice = np.concatenate([np.tile(ideals, (len(true_rows), 1)),
                                     np.zeros((len(false_rows), len(distinct)), dtype=bool)], axis=0)
            body_now = np.concatenate([np.ones(len(true_rows) * len(ideals), dtype=bool),
                                       np.zeros(len(false_rows), dtype=bool)])
            for member in sorted(members, key=formula_key):
                group = denotations[member]
                append(member, choice[:, distinct.index(group)] if group else body_now.copy())
        else:
            raise TypeError(f"not a CIEL formula: {formula!r}")

    labels = {}
    for agent in agent_model.agents:
        cols = [index[f] for f in denotations if agent.name in denotations[f]]
        if cols:
            _, inverse = np.unique(matrix[:, cols], axis=0, return_inverse=True)
            labels[agent.name] = inverse.reshape(-1)
        else:
            labels[agent.name] = np.zeros(matrix.shape[0], dtype=np.int64)

    logger.debug(f"Enumerated {matrix.shape[0]} types over {len(columns)} positive formulas")
    return TypeSpace(sigma=sigma, agent_model=agent_model, columns=tuple(columns), matrix=matrix,
                     denotations=denotations, labels=labels, alive=np.ones(matrix.shape[0], dtype=bool))


def eliminate(ts: TypeSpace, order: Optional[Sequence[int]] = None, max_workers: int = 1) -> TypeSpace:
    """
    Delete types with unfulfillable obligations until a fixpoint is reached

    Args:
        ts: Type space from enumerate_types
        order: If given, delete one type per step, the first unfulfilled type in this order
        max_workers: Threads checking the obligation groups of a round

    Returns:
        New TypeSpace with the surviving types marked alive
    """
    alive = ts.alive.copy()
    groups = ts.obligation_groups()
    rounds = 0
    while True:
        snapshot = alive.copy()
        doomed = np.zeros(ts.size, dtype=bool)
        if max_workers > 1 and len(groups) > 1:
            with ThreadPoolExecutor(max_workers=max_workers) as executor:
                futures = {executor.submit(ts.unfulfilled, group, formulas, snapshot): group
                           for group, formulas in groups.items()}
                for future in as_completed(futures):
                    doomed |= future.result()
        else:
            for group, formulas in groups.items():
                doomed |= ts.unfulfilled(group, formulas, snapshot)

        if not doomed.any():
            break
        if order is None:
            alive &= ~doomed
        else:
            first = next(i for i in order if doomed[i])
            alive[first] = False
        rounds += 1
        logger.debug(f"Elimination round {rounds}: {int(doomed.sum())} unfulfilled, "
                     f"{int(alive.sum())} types left")

    return replace(ts, alive=alive, rounds=rounds)


# ---------------------------------------------------------------------------
# Witness models
# ---------------------------------------------------------------------------

def type_world(row: int) -> str:
    return f"t{row}"


def _relation_pairs(ts: TypeSpace, rows: np.ndarray) -> int:
    total = 0
    for labels in ts.labels.values():
        _, counts = np.unique(labels[rows], return_counts=True)
        total += int((counts.astype(np.int64) ** 2).sum())
    return total


def build_witness(ts: TypeSpace, start: int, pair_cap: int = 2_000_000) -> CielModel:
    """
    Model whose worlds are the surviving types, linked by the per-agent type links

    Falls back to the start type's component when the full model has too many pairs.
    """
    rows = ts.surviving
    pairs = _relation_pairs(ts, rows)
    if pairs > pair_cap:
        comp = ts.components(ts.agent_model.names)
        rows = np.flatnonzero(comp == comp[start])
        logger.warning(f"Witness over all {len(ts.surviving)} types needs {pairs} pairs; "
                       f"keeping the {len(rows)} types connected to the start type")
        pairs = _relation_pairs(ts, rows)
        if pairs > pair_cap:
            raise ResourceLimitError("witness_pairs", pairs, pair_cap)

    worlds = tuple(type_world(int(r)) for r in rows)
    valuation = {}
    for formula in ts.columns:
        if isinstance(formula, Atom):
            valuation[formula.name] = frozenset(type_world(int(r)) for r in rows if ts.matrix[r, ts.column_index[formula]])
    indist = {}
    for name, labels in ts.labels.items():
        blocks: Dict[int, List[str]] = {}
        for r in rows:
            blocks.setdefault(int(labels[r]), []).append(type_world(int(r)))
        indist[name] = frozenset((x, y) for block in blocks.values() for x in block for y in block)
    return CielModel(worlds=worlds, world_valuation=valuation, indist=indist, agent_model=ts.agent_model)


def canonical_pseudo_model(ts: TypeSpace) -> PseudoModel:
    """Pseudo-model over surviving types; each index denotation gets its reachability relation"""
    rows = ts.surviving
    worlds = tuple(type_world(int(r)) for r in rows)
    valuation = {f.name: frozenset(type_world(int(r)) for r in rows if ts.values(f)[r])
                 for f in ts.columns if isinstance(f, Atom)}
    indist_by_set = {}
    for group in set(ts.denotations.values()):
        comp = ts.components(group)
        blocks: Dict[int, List[str]] = {}
        for r in rows:
            blocks.setdefault(int(comp[r]), []).append(type_world(int(r)))
        indist_by_set[group] = frozenset((x, y) for block in blocks.values() for x in block for y in block)
    return PseudoModel(worlds=worlds, agent_model=ts.agent_model, world_valuation=valuation,
                       indist_by_set=indist_by_set)


def assert_truth_lemma(ts: TypeSpace, witness: Optional[CielModel] = None):
    """
    Membership equals truth for every closure formula at every surviving type

    Raises:
        AssertionError: on the first mismatch
    """
    rows = ts.surviving
    for formula in ts.sigma:
        mismatch = (ts.truth(formula) != ts.values(formula))[rows]
        if mismatch.any():
            row = int(rows[np.argmax(mismatch)])
            raise AssertionError(f"truth lemma fails for {formula} at type {row}")
    if witness is None:
        return
    ext = extensions(witness, ts.sigma)
    witness_rows = np.array([int(world[1:]) for world in witness.worlds], dtype=np.int64)
    for formula in ts.sigma:
        holds = np.array([world in ext[formula] for world in witness.worlds], dtype=bool)
        mismatch = holds != ts.values(formula)[witness_rows]
        if mismatch.any():
            row = int(witness_rows[np.argmax(mismatch)])
            raise AssertionError(f"witness disagrees with type {row} on {formula}")


# ---------------------------------------------------------------------------
# Decision procedure
# ---------------------------------------------------------------------------

@dataclass
class SatResult:
    """Verdict of sat; a satisfiable result carries a witness model and start world"""
    satisfiable: bool
    witness: Optional[CielModel] = None
    start: Optional[str] = None
    statistics: Dict[str, int] = field(default_factory=dict)
    type_space: Optional[TypeSpace] = field(default=None, repr=False)

    def __bool__(self):
        return self.satisfiable

    @property
    def verdict(self) -> str:
        return "SAT" if self.satisfiable else "UNSAT"


def prepare(formula: WorldFormula, theory: Optional[AgentTheory] = None,
            limits: Optional[DecisionLimits] = None) -> TypeSpace:
    """Closure, filtered agent model and type enumeration for formula"""
    limits = limits or DecisionLimits()
    sigma_ag = agent_subformulae(formula)
    agent_model = filtered_model(sigma_ag, theory, limits.agent_atom_cap)

    with performance_monitor.track("closure") as result:
        sigma = closure(formula, clo_ag(sigma_ag, agent_model), limits.closure_cap)
        result["sigma_size"] = sigma.size
    if sigma.size > limits.sigma_cap:
        raise ResourceLimitError("sigma", sigma.size, limits.sigma_cap)

    with performance_monitor.track("type_enumeration") as result:
        ts = enumerate_types(sigma, agent_model, limits.type_cap)
        result["types"] = ts.size
    logger.info(f"Closure has {sigma.size} formulas; {len(agent_model.agents)} agents, {ts.size} types")
    return ts


def _pick_start(ts: TypeSpace, candidates: np.ndarray) -> int:
    comp = ts.components(ts.agent_model.names)
    sizes = np.bincount(comp[ts.alive])
    return int(min(candidates, key=lambda r: (sizes[comp[r]], r)))


def sat(formula: WorldFormula, theory: Optional[AgentTheory] = None,
        limits: Optional[DecisionLimits] = None, max_workers: int = 1, verify: bool = True) -> SatResult:
    """
    Decide satisfiability of a CIEL formula

    Args:
        formula: Input formula
        theory: Background agent theory
        limits: Resource caps
        max_workers: Threads per elimination round
        verify: Check the truth lemma on the type space and the witness

    Returns:
        SatResult with witness model and start world when satisfiable
    """
    limits = limits or DecisionLimits()
    ts = prepare(formula, theory, limits)

    with performance_monitor.track("elimination") as result:
        ts = eliminate(ts, max_workers=max_workers)
        result["rounds"] = ts.rounds

    statistics = {
        "sigma_size": ts.sigma.size,
        "agents": len(ts.agent_model.agents),
        "types": ts.size,
        "surviving": int(ts.alive.sum()),
        "eliminated": int(ts.size - ts.alive.sum()),
        "rounds": ts.rounds,
    }
    candidates = np.flatnonzero(ts.alive & ts.values(formula))
    if not len(candidates):
        logger.info(f"UNSAT after {ts.rounds} rounds ({statistics['eliminated']} types eliminated)")
        return SatResult(False, statistics=statistics, type_space=ts)

    start = _pick_start(ts, candidates)
    witness = build_witness(ts, start, limits.witness_pair_cap)
    statistics["witness_worlds"] = len(witness.worlds)
    if verify:
        assert_truth_lemma(ts, witness)
        if type_world(start) not in extensions(witness, [formula])[formula]:
            raise AssertionError(f"witness does not satisfy {formula} at {type_world(start)}")
    logger.info(f"SAT with a witness of {len(witness.worlds)} worlds after {ts.rounds} rounds")
    return SatResult(True, witness=witness, start=type_world(start), statistics=statistics, type_space=ts)


def valid(formula: WorldFormula, theory: Optional[AgentTheory] = None,
          limits: Optional[DecisionLimits] = None, max_workers: int = 1) -> bool:
    """A formula is valid when its normalized negation is unsatisfiable"""
    return not sat(nneg(formula), theory, limits, max_workers).satisfiable


def find_countermodel(formula: WorldFormula, theory: Optional[AgentTheory] = None,
                      limits: Optional[DecisionLimits] = None) -> Optional[Tuple[CielModel, str]]:
    """Model and world refuting formula, or None when formula is valid"""
    result = sat(nneg(formula), theory, limits)
    return (result.witness, result.start) if result else None


# ---------------------------------------------------------------------------
# GEL oracle
# ---------------------------------------------------------------------------

def _gel_value(formula, assignment):
    if isinstance(formula, Falsum):
        return False
    if isinstance(formula, Not):
        return not _gel_value(formula.sub, assignment)
    if isinstance(formula, And):
        return _gel_value(formula.left, assignment) and _gel_value(formula.right, assignment)
    return assignment[formula]


def gel_sat(formula: WorldFormula, limits: Optional[DecisionLimits] = None) -> bool:
    """
    Satisfiability of a GEL formula by type elimination over its closure

    Types assign atoms and C{G}-formulas freely, subject to C{G} phi implying phi and to
    C{G} phi implying C{H} phi for every closure formula C{H} phi with H inside G.
    """
    limits = limits or DecisionLimits()
    sigma = closure(formula, cap=limits.closure_cap)
    positions = [f for f in sigma if isinstance(f, (Atom, GroupCommon))]
    if len(positions) > limits.gel_position_cap:
        raise ResourceLimitError("gel_positions", len(positions), limits.gel_position_cap)
    commons = [f for f in positions if isinstance(f, GroupCommon)]

    types = []
    for bits in itertools.product((False, True), repeat=len(positions)):
        assignment = dict(zip(positions, bits))
        coherent = all(
            not assignment[c] or (_gel_value(c.body, assignment)
                                  and all(assignment[d] for d in commons
                                          if d.body == c.body and d.group <= c.group))
            for c in commons)
        if coherent:
            types.append(assignment)

    names = sorted({name for c in commons for name in c.group})
    traces = {name: [tuple(t[c] for c in commons if name in c.group) for t in types] for name in names}
    alive = set(range(len(types)))

    def reachable(start, group):
        seen = {start}
        queue = deque([start])
        while queue:
            current = queue.popleft()
            for other in alive:
                if other not in seen and any(traces[n][other] == traces[n][current] for n in group):
                    seen.add(other)
                    queue.append(other)
        return seen

    changed = True
    while changed:
        changed = False
        for i in sorted(alive):
            for c in commons:
                if types[i][c]:
                    continue
                if not any(not _gel_value(c.body, types[j]) for j in reachable(i, c.group)):
                    alive.discard(i)
                    changed = True
                    break

    result = any(_gel_value(formula, types[i]) for i in alive)
    logger.debug(f"GEL closure {len(sigma)}: {len(types)} types, {len(alive)} survive, sat={result}")
    return result
