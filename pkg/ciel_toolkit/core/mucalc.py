"""
Single-variable full mu-calculus with converse programs

Holds the formula AST, a finite-model evaluator, the translation t from CIEL and the
two model constructions relating CIEL models to mu-calculus models. The only
fixpoint variable is z.
"""
import logging
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Dict, FrozenSet, Iterable, List, Mapping, Set, Tuple

from lark import Lark, Transformer, v_args
from lark.exceptions import UnexpectedEOF, UnexpectedInput, VisitError

from .agentlogic import Agent, AgentModel
from .errors import FormulaSyntaxError, IllFormedFixpointError, ReservedNameError
from .formula import (AgentAnd, AgentAtom, AgentFalsum, AgentFormula, AgentNot, And, Atom,
                      Common, Falsum, Not, WorldFormula, agent_atoms, atoms)
from .semantics import CielModel, validate

logger = logging.getLogger(__name__)

EDGE, PI1, PI2 = "edge", "pi1", "pi2"
RESERVED_PROGRAMS = frozenset({EDGE, PI1, PI2})
VARIABLE = "z"


@dataclass(frozen=True)
class Program:
    """Atomic program, or its converse when converse is set"""
    name: str
    converse: bool = False

    @property
    def inverse(self) -> "Program":
        return Program(self.name, not self.converse)

    def __str__(self):
        return f"{self.name}^-" if self.converse else self.name


# ---------------------------------------------------------------------------
# Formulas
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MuFormula:
    def __str__(self):
        return to_text(self)


@dataclass(frozen=True)
class MuFalsum(MuFormula):
    pass


@dataclass(frozen=True)
class MuAtom(MuFormula):
    name: str


@dataclass(frozen=True)
class MuVar(MuFormula):
    pass


@dataclass(frozen=True)
class MuNot(MuFormula):
    sub: MuFormula


@dataclass(frozen=True)
class MuAnd(MuFormula):
    left: MuFormula
    right: MuFormula


@dataclass(frozen=True)
class MuBox(MuFormula):
    program: Program
    body: MuFormula


@dataclass(frozen=True)
class MuNu(MuFormula):
    """Greatest fixpoint nu z. body; z must occur only positively in body"""
    body: MuFormula

    def __post_init__(self):
        if has_negative_occurrence(self.body):
            raise IllFormedFixpointError(f"z occurs negatively in nu z. {to_text(self.body)}")


def has_negative_occurrence(formula: MuFormula, positive: bool = True) -> bool:
    """Does the free variable z occur under an odd number of negations?"""
    if isinstance(formula, MuVar):
        return not positive
    if isinstance(formula, MuNot):
        return has_negative_occurrence(formula.sub, not positive)
    if isinstance(formula, MuAnd):
        return (has_negative_occurrence(formula.left, positive)
                or has_negative_occurrence(formula.right, positive))
    if isinstance(formula, MuBox):
        return has_negative_occurrence(formula.body, positive)
    # z is rebound by an inner nu, and constants have no occurrences
    return False


def mu_verum() -> MuFormula:
    return MuNot(MuFalsum())


def diamond(program: Program, body: MuFormula) -> MuFormula:
    return MuNot(MuBox(program, MuNot(body)))


def mu_or(left: MuFormula, right: MuFormula) -> MuFormula:
    return MuNot(MuAnd(MuNot(left), MuNot(right)))


def mu_implies(left: MuFormula, right: MuFormula) -> MuFormula:
    return MuNot(MuAnd(left, MuNot(right)))


def substitute_negated_var(formula: MuFormula) -> MuFormula:
    """formula with every free z replaced by ~z"""
    if isinstance(formula, MuVar):
        return MuNot(MuVar())
    if isinstance(formula, MuNot):
        return MuNot(substitute_negated_var(formula.sub))
    if isinstance(formula, MuAnd):
        return MuAnd(substitute_negated_var(formula.left), substitute_negated_var(formula.right))
    if isinstance(formula, MuBox):
        return MuBox(formula.program, substitute_negated_var(formula.body))
    return formula


def mu_fixpoint(body: MuFormula) -> MuFormula:
    """Least fixpoint mu z. body, encoded as ~nu z. ~body[~z/z]"""
    return MuNot(MuNu(MuNot(substitute_negated_var(body))))


def mu_size(formula: MuFormula) -> int:
    if isinstance(formula, MuNot):
        return 1 + mu_size(formula.sub)
    if isinstance(formula, MuAnd):
        return 1 + mu_size(formula.left) + mu_size(formula.right)
    if isinstance(formula, (MuBox, MuNu)):
        return 1 + mu_size(formula.body)
    return 1


# ---------------------------------------------------------------------------
# Models and evaluation
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class MuModel:
    """Domain, one relation per atomic program, and an atom valuation

    Converse relations are derived on demand and never stored.
    """
    domain: Tuple[str, ...]
    transitions: Mapping[str, FrozenSet[Tuple[str, str]]]
    valuation: Mapping[str, FrozenSet[str]]

    @cached_property
    def domain_set(self) -> FrozenSet[str]:
        return frozenset(self.domain)

    @cached_property
    def _successor_tables(self) -> Dict[Program, Dict[str, Set[str]]]:
        tables = {}
        for name, relation in self.transitions.items():
            forward, backward = {}, {}
            for x, y in relation:
                forward.setdefault(x, set()).add(y)
                backward.setdefault(y, set()).add(x)
            tables[Program(name)] = forward
            tables[Program(name, True)] = backward
        return tables

    def successors(self, program: Program) -> Dict[str, Set[str]]:
        return self._successor_tables.get(program, {})

    def relation(self, program: Program) -> FrozenSet[Tuple[str, str]]:
        pairs = self.transitions.get(program.name, frozenset())
        return frozenset((y, x) for x, y in pairs) if program.converse else frozenset(pairs)


def mu_eval(model: MuModel, formula: MuFormula, assignment: Iterable[str] = frozenset()) -> FrozenSet[str]:
    """
    Denotation of formula with z interpreted as assignment

    Args:
        model: Finite mu-model
        formula: Mu-calculus formula
        assignment: Subset of the domain assigned to z

    Returns:
        The set of domain elements satisfying formula
    """
    return _mu_eval(model, formula, frozenset(assignment))


def _mu_eval(model, formula, current):
    if isinstance(formula, MuFalsum):
        return frozenset()
    if isinstance(formula, MuAtom):
        return frozenset(model.valuation.get(formula.name, frozenset())) & model.domain_set
    if isinstance(formula, MuVar):
        return current
    if isinstance(formula, MuNot):
        return model.domain_set - _mu_eval(model, formula.sub, current)
    if isinstance(formula, MuAnd):
        return _mu_eval(model, formula.left, current) & _mu_eval(model, formula.right, current)
    if isinstance(formula, MuBox):
        body = _mu_eval(model, formula.body, current)
        succ = model.successors(formula.program)
        return frozenset(x for x in model.domain if succ.get(x, set()) <= body)
    if isinstance(formula, MuNu):
        return nu_iterates(model, formula)[-1]
    raise TypeError(f"not a mu-calculus formula: {formula!r}")


def nu_iterates(model: MuModel, formula: MuNu) -> List[FrozenSet[str]]:
    """Decreasing chain X, F(X), F(F(X)), ... up to the greatest fixpoint"""
    current = model.domain_set
    chain = [current]
    while True:
        following = _mu_eval(model, formula.body, current)
        if following == current:
            return chain
        chain.append(following)
        current = following


# ---------------------------------------------------------------------------
# Translation t
# ---------------------------------------------------------------------------

def embed_agent(formula: AgentFormula) -> MuFormula:
    """The identity embedding u of propositional agent formulas"""
    if isinstance(formula, AgentFalsum):
        return MuFalsum()
    if isinstance(formula, AgentAtom):
        return MuAtom(formula.name)
    if isinstance(formula, AgentNot):
        return MuNot(embed_agent(formula.sub))
    if isinstance(formula, AgentAnd):
        return MuAnd(embed_agent(formula.left), embed_agent(formula.right))
    raise TypeError(f"not an agent formula: {formula!r}")


def forward_step(index: MuFormula, target: MuFormula) -> MuFormula:
    """[edge](<pi1> index -> [pi2] target)"""
    return MuBox(Program(EDGE), mu_implies(diamond(Program(PI1), index), MuBox(Program(PI2), target)))


def backward_step(index: MuFormula, target: MuFormula) -> MuFormula:
    """[pi2^-](<pi1> index -> [edge^-] target)"""
    return MuBox(Program(PI2, True),
                 mu_implies(diamond(Program(PI1), index), MuBox(Program(EDGE, True), target)))


def _check_reserved(names: Iterable[str]):
    clashes = sorted(set(names) & RESERVED_PROGRAMS)
    if clashes:
        raise ReservedNameError(f"atom names reserved for programs: {', '.join(clashes)}")


def translate_t(formula: WorldFormula) -> MuFormula:
    """
    Translate a CIEL formula into the single-variable mu-calculus

    C[psi] phi becomes nu z. t(phi) & [edge](<pi1>psi -> [pi2]z) & [pi2^-](<pi1>psi -> [edge^-]z).
    The index is copied twice but never recursed into, so the output is linear in size.
    """
    _check_reserved(atoms(formula) | agent_atoms(formula))
    return _t(formula)


def _t(formula):
    if isinstance(formula, Falsum):
        return MuFalsum()
    if isinstance(formula, Atom):
        return MuAtom(formula.name)
    if isinstance(formula, Not):
        return MuNot(_t(formula.sub))
    if isinstance(formula, And):
        return MuAnd(_t(formula.left), _t(formula.right))
    if isinstance(formula, Common):
        index = embed_agent(formula.index)
        return MuNu(MuAnd(MuAnd(_t(formula.body), forward_step(index, MuVar())),
                          backward_step(index, MuVar())))
    raise TypeError(f"not a CIEL formula: {formula!r}")


# ---------------------------------------------------------------------------
# Model constructions
# ---------------------------------------------------------------------------

def agent_element(name: str) -> str:
    return f"a:{name}"


def world_element(world: str) -> str:
    return f"w:{world}"


def pair_element(name: str, world: str) -> str:
    return f"e:{name}:{world}"


def ciel_model_to_mu(model: CielModel) -> MuModel:
    """
    Encode a CIEL model as a mu-model over agents, worlds and agent-world pairs

    edge links x to (a, y) whenever x ~a y; pi1 projects (a, x) to a and pi2 to x.
    Agent atoms hold on the agent part and world atoms on the world part.
    """
    agents = model.agent_model.agents
    _check_reserved(set(model.world_valuation) | set(model.agent_model.atoms))
    domain = ([agent_element(a.name) for a in agents]
              + [world_element(w) for w in model.worlds]
              + [pair_element(a.name, w) for a in agents for w in model.worlds])

    edge = frozenset((world_element(x), pair_element(a.name, y))
                     for a in agents for x, y in model.indist.get(a.name, ()))
    pi1 = frozenset((pair_element(a.name, w), agent_element(a.name)) for a in agents for w in model.worlds)
    pi2 = frozenset((pair_element(a.name, w), world_element(w)) for a in agents for w in model.worlds)

    valuation: Dict[str, Set[str]] = {}
    for atom, worlds in model.world_valuation.items():
        valuation.setdefault(atom, set()).update(world_element(w) for w in worlds if w in model.world_set)
    for agent in agents:
        for atom, value in agent.valuation:
            if value:
                valuation.setdefault(atom, set()).add(agent_element(agent.name))

    logger.debug(f"Encoded {len(model.worlds)} worlds and {len(agents)} agents as {len(domain)} elements")
    return MuModel(domain=tuple(domain), transitions={EDGE: edge, PI1: pi1, PI2: pi2},
                   valuation={atom: frozenset(els) for atom, els in valuation.items()})


def mu_model_to_ciel(model: MuModel) -> CielModel:
    """
    Decode a mu-model into a CIEL model whose agents and worlds are both the domain

    x ~a y whenever some edge successor of x projects to a by pi1 and to y by pi2;
    each relation is then closed into an equivalence.
    """
    atom_names = sorted(model.valuation)
    agents = tuple(Agent(element, tuple((atom, element in model.valuation[atom]) for atom in atom_names))
                   for element in model.domain)

    pi1 = model.successors(Program(PI1))
    pi2 = model.successors(Program(PI2))
    indist: Dict[str, Set[Tuple[str, str]]] = {element: set() for element in model.domain}
    for x, mid in model.transitions.get(EDGE, ()):
        for agent in pi1.get(mid, ()):
            for y in pi2.get(mid, ()):
                indist[agent].add((x, y))
                indist[agent].add((y, x))

    decoded = CielModel(worlds=model.domain, world_valuation=dict(model.valuation),
                        indist={name: frozenset(pairs) for name, pairs in indist.items()},
                        agent_model=AgentModel(agents=agents))
    return validate(decoded, mode="normalize")


def check_via_mu(model: CielModel, world: str, formula: WorldFormula) -> bool:
    """Truth of formula at world, computed through the mu-calculus encoding"""
    model.require_world(world)
    return world_element(world) in mu_eval(ciel_model_to_mu(model), translate_t(formula))


# ---------------------------------------------------------------------------
# Text syntax
# ---------------------------------------------------------------------------

MU_GRAMMAR = r"""
    ?start: iff

    ?iff: imp
        | imp "<->" iff                  -> equiv
        | "nu" NAME "." iff              -> nu
        | "mu" NAME "." iff              -> mu

    ?imp: disj
        | disj "->" imp                  -> implies

    ?disj: conj
         | disj "|" conj                 -> or_

    ?conj: unary
         | conj "&" unary                -> and_

    ?unary: "~" unary                    -> not_
          | "[" program "]" unary        -> box
          | "<" program ">" unary        -> diamond
          | atom

    ?atom: "true"                        -> true
         | "false"                       -> false
         | NAME                          -> atom
         | "(" iff ")"

    program: NAME                        -> forward
           | NAME "^-"                   -> converse

    NAME: /[a-zA-Z_][a-zA-Z0-9_]*/

    %import common.WS
    %ignore WS
"""


@v_args(inline=True)
class _MuBuilder(Transformer):

    def true(self):
        return mu_verum()

    def false(self):
        return MuFalsum()

    def atom(self, token):
        return MuVar() if str(token) == VARIABLE else MuAtom(str(token))

    def not_(self, sub):
        return MuNot(sub)

    def and_(self, left, right):
        return MuAnd(left, right)

    def or_(self, left, right):
        return mu_or(left, right)

    def implies(self, left, right):
        return mu_implies(left, right)

    def equiv(self, left, right):
        return MuAnd(mu_implies(left, right), mu_implies(right, left))

    def forward(self, token):
        return Program(str(token))

    def converse(self, token):
        return Program(str(token), True)

    def box(self, program, body):
        return MuBox(program, body)

    def diamond(self, program, body):
        return diamond(program, body)

    def nu(self, variable, body):
        _require_variable(variable)
        return MuNu(body)

    def mu(self, variable, body):
        _require_variable(variable)
        return mu_fixpoint(body)


def _require_variable(token):
    if str(token) != VARIABLE:
        raise FormulaSyntaxError(f"only the fixpoint variable {VARIABLE} is supported, got {token}")


@lru_cache(maxsize=1)
def _mu_parser():
    return Lark(MU_GRAMMAR, parser="lalr")


def parse_mu(text: str) -> MuFormula:
    """Parse the mu-calculus text syntax produced by to_text"""
    try:
        tree = _mu_parser().parse(text)
    except UnexpectedEOF as e:
        raise FormulaSyntaxError("unexpected end of input (unbalanced brackets?)") from e
    except UnexpectedInput as e:
        raise FormulaSyntaxError(f"unexpected input {str(e).splitlines()[0]!r}",
                                 getattr(e, "line", None), getattr(e, "column", None)) from e
    try:
        return _MuBuilder().transform(tree)
    except VisitError as e:
        if isinstance(e.orig_exc, (FormulaSyntaxError, IllFormedFixpointError)):
            raise e.orig_exc
        raise


_NU, _IMP, _OR, _AND, _UNARY = range(5)


def _fmt(formula, sugar) -> Tuple[str, int]:
    if isinstance(formula, MuFalsum):
        return "false", _UNARY
    if isinstance(formula, MuAtom):
        return formula.name, _UNARY
    if isinstance(formula, MuVar):
        return VARIABLE, _UNARY
    if isinstance(formula, MuNot):
        sub = formula.sub
        if sugar:
            if isinstance(sub, MuFalsum):
                return "true", _UNARY
            if isinstance(sub, MuBox) and isinstance(sub.body, MuNot):
                return f"<{sub.program}> {_show(sub.body.sub, _UNARY, sugar)}", _UNARY
            if isinstance(sub, MuAnd) and isinstance(sub.right, MuNot):
                if isinstance(sub.left, MuNot):
                    return f"{_show(sub.left.sub, _OR, sugar)} | {_show(sub.right.sub, _AND, sugar)}", _OR
                return f"{_show(sub.left, _OR, sugar)} -> {_show(sub.right.sub, _IMP, sugar)}", _IMP
        return f"~{_show(sub, _UNARY, sugar)}", _UNARY
    if isinstance(formula, MuAnd):
        return f"{_show(formula.left, _AND, sugar)} & {_show(formula.right, _UNARY, sugar)}", _AND
    if isinstance(formula, MuBox):
        return f"[{formula.program}] {_show(formula.body, _UNARY, sugar)}", _UNARY
    if isinstance(formula, MuNu):
        return f"nu {VARIABLE}. {_show(formula.body, _NU, sugar)}", _NU
    raise TypeError(f"not a mu-calculus formula: {formula!r}")


def _show(formula, required, sugar):
    text, own = _fmt(formula, sugar)
    return f"({text})" if own < required else text


def to_text(formula: MuFormula, sugar: bool = True) -> str:
    """Print in the mu-calculus text syntax (nu z. ..., [edge], <pi1>, [pi2^-])"""
    return _show(formula, _NU, sugar)
