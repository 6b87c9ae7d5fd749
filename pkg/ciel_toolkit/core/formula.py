"""
Formula syntax for the CIEL reasoning toolkit

World formulas are built from falsum, world atoms, negation, conjunction and the
indexed common-knowledge operator C[psi] phi. Agent formulas (the indices) are
propositional. Derived connectives are expanded when formulas are built, so every
algorithm downstream handles exactly the core constructors.
"""
import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import FrozenSet, Iterable, Iterator, Optional, Set, Tuple, Union

from lark import Lark, Transformer, v_args
from lark.exceptions import UnexpectedEOF, UnexpectedInput, VisitError

from .errors import FormulaSyntaxError, ResourceLimitError

logger = logging.getLogger(__name__)

DEFAULT_CLOSURE_CAP = 4096


# ---------------------------------------------------------------------------
# Agent formulas
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AgentFormula:
    """Propositional formula over agent atoms"""

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True)
class AgentFalsum(AgentFormula):
    pass


@dataclass(frozen=True)
class AgentAtom(AgentFormula):
    name: str


@dataclass(frozen=True)
class AgentNot(AgentFormula):
    sub: AgentFormula


@dataclass(frozen=True)
class AgentAnd(AgentFormula):
    left: AgentFormula
    right: AgentFormula


# ---------------------------------------------------------------------------
# World formulas
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WorldFormula:
    """Formula evaluated at a world of an epistemic model"""

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True)
class Falsum(WorldFormula):
    pass


@dataclass(frozen=True)
class Atom(WorldFormula):
    name: str


@dataclass(frozen=True)
class Not(WorldFormula):
    sub: WorldFormula


@dataclass(frozen=True)
class And(WorldFormula):
    left: WorldFormula
    right: WorldFormula


@dataclass(frozen=True)
class Common(WorldFormula):
    """C[index] body: body holds throughout the group closure of agents satisfying index"""
    index: AgentFormula
    body: WorldFormula


@dataclass(frozen=True)
class GroupCommon(WorldFormula):
    """C{a,b} body over an explicit nonempty group of agent names"""
    group: FrozenSet[str]
    body: WorldFormula


Formula = Union[AgentFormula, WorldFormula]


# ---------------------------------------------------------------------------
# Derived connectives
# ---------------------------------------------------------------------------

def _family(formula):
    if isinstance(formula, AgentFormula):
        return AgentFalsum, AgentNot, AgentAnd
    return Falsum, Not, And


def verum(agent=False):
    """The constant true, encoded as the negation of falsum"""
    return AgentNot(AgentFalsum()) if agent else Not(Falsum())


def disjunction(left, right):
    _, neg, conj = _family(left)
    return neg(conj(neg(left), neg(right)))


def implication(left, right):
    _, neg, conj = _family(left)
    return neg(conj(left, neg(right)))


def equivalence(left, right):
    _, _, conj = _family(left)
    return conj(implication(left, right), implication(right, left))


def possible(index, body):
    """Dual of C: P[index] body is stored as ~C[index] ~body"""
    return Not(Common(index, Not(body)))


def conjoin(items, agent=False):
    """Left-folded conjunction; the empty conjunction is true"""
    items = list(items)
    if not items:
        return verum(agent)
    result = items[0]
    _, _, conj = _family(result)
    for item in items[1:]:
        result = conj(result, item)
    return result


def disjoin(items, agent=False):
    """Left-folded disjunction; the empty disjunction is falsum"""
    items = list(items)
    if not items:
        return AgentFalsum() if agent else Falsum()
    result = items[0]
    for item in items[1:]:
        result = disjunction(result, item)
    return result


# ---------------------------------------------------------------------------
# Structural operations
# ---------------------------------------------------------------------------

def nneg(formula):
    """Normalized negation: strip one outer negation if present, otherwise add one"""
    if isinstance(formula, Not):
        return formula.sub
    if isinstance(formula, AgentNot):
        return formula.sub
    _, neg, _ = _family(formula)
    return neg(formula)


def children(formula) -> Tuple:
    """Immediate subformulas of the same family (indices are not world children)"""
    if isinstance(formula, (Not, AgentNot)):
        return (formula.sub,)
    if isinstance(formula, (And, AgentAnd)):
        return (formula.left, formula.right)
    if isinstance(formula, (Common, GroupCommon)):
        return (formula.body,)
    return ()


def subformulae(formula) -> Set:
    """All subformulas of the same family, the formula itself included"""
    seen = set()
    stack = [formula]
    while stack:
        current = stack.pop()
        if current in seen:
            continue
        seen.add(current)
        stack.extend(children(current))
    return seen


def agent_subformulae(formula: WorldFormula) -> Set[AgentFormula]:
    """Every C-index occurring in formula together with its agent subformulas"""
    result = set()
    for sub in subformulae(formula):
        if isinstance(sub, Common):
            result |= subformulae(sub.index)
    return result


def atoms(formula) -> Set[str]:
    """Atom names of the formula's own family"""
    return {sub.name for sub in subformulae(formula) if isinstance(sub, (Atom, AgentAtom))}


def agent_atoms(formula: WorldFormula) -> Set[str]:
    return {sub.name for sub in agent_subformulae(formula) if isinstance(sub, AgentAtom)}


def size(formula) -> int:
    """Number of AST nodes, agent indices included"""
    if isinstance(formula, Common):
        return 1 + size(formula.index) + size(formula.body)
    if isinstance(formula, GroupCommon):
        return 1 + len(formula.group) + size(formula.body)
    return 1 + sum(size(child) for child in children(formula))


def modal_depth(formula) -> int:
    if isinstance(formula, (Common, GroupCommon)):
        return 1 + modal_depth(formula.body)
    return max((modal_depth(child) for child in children(formula)), default=0)


def is_boolean_connective(formula) -> bool:
    return isinstance(formula, (Falsum, Not, And, AgentFalsum, AgentNot, AgentAnd))


# ---------------------------------------------------------------------------
# Closure
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ClosureSet:
    """Subformula- and nneg-closed set around root, expanded over the agent closure"""
    root: WorldFormula
    world_formulas: FrozenSet[WorldFormula]
    agent_closure: FrozenSet[AgentFormula]

    def __contains__(self, formula):
        return formula in self.world_formulas

    def __iter__(self) -> Iterator[WorldFormula]:
        return iter(sorted(self.world_formulas, key=formula_key))

    def __len__(self):
        return len(self.world_formulas)

    @property
    def size(self):
        return len(self.world_formulas)

    @property
    def common_formulas(self):
        return [f for f in self if isinstance(f, Common)]


def closure(root: WorldFormula, agent_closure: Iterable[AgentFormula] = (),
            cap: Optional[int] = DEFAULT_CLOSURE_CAP) -> ClosureSet:
    """
    Compute the least set containing root that is closed under world subformulas,
    normalized negation and re-indexing of C-formulas over the agent closure

    Args:
        root: Input formula
        agent_closure: Agent formulas every C-formula is re-indexed with
        cap: Maximum number of formulas, None for no limit

    Returns:
        ClosureSet
    """
    agent_closure = frozenset(agent_closure)
    result = set()
    todo = [root]
    while todo:
        current = todo.pop()
        if current in result:
            continue
        result.add(current)
        if cap is not None and len(result) > cap:
            raise ResourceLimitError("closure", len(result), cap)
        todo.extend(children(current))
        todo.append(nneg(current))
        if isinstance(current, Common):
            todo.extend(Common(index, current.body) for index in agent_closure)

    logger.debug(f"Closure of size {len(result)} over {len(agent_closure)} agent formulas")
    return ClosureSet(root=root, world_formulas=frozenset(result), agent_closure=agent_closure)


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

FORMULA_GRAMMAR = r"""
    ?start: iff

    ?iff: imp
        | imp "<->" iff                  -> equiv

    ?imp: disj
        | disj "->" imp                  -> implies

    ?disj: conj
         | disj "|" conj                 -> or_

    ?conj: unary
         | conj "&" unary                -> and_

    ?unary: "~" unary                    -> not_
          | "C" "[" iff "]" unary        -> common
          | "P" "[" iff "]" unary        -> possible
          | "C" "{" name_list "}" unary  -> group_common
          | atom

    ?atom: "true"                        -> true
         | "false"                       -> false
         | NAME                          -> atom
         | "(" iff ")"

    name_list: NAME ("," NAME)*

    NAME: /[a-zA-Z_][a-zA-Z0-9_]*/

    %import common.WS
    %ignore WS
"""

RESERVED_WORDS = frozenset({"C", "P", "true", "false"})


@v_args(inline=True)
class _FormulaBuilder(Transformer):
    """Turns the parse tree into core world formulas with sugar expanded"""

    def true(self):
        return verum()

    def false(self):
        return Falsum()

    def atom(self, token):
        return Atom(str(token))

    def not_(self, sub):
        return Not(sub)

    def and_(self, left, right):
        return And(left, right)

    def or_(self, left, right):
        return disjunction(left, right)

    def implies(self, left, right):
        return implication(left, right)

    def equiv(self, left, right):
        return equivalence(left, right)

    def common(self, index, body):
        return Common(as_agent_formula(index), body)

    def possible(self, index, body):
        return possible(as_agent_formula(index), body)

    def group_common(self, names, body):
        return GroupCommon(names, body)

    def name_list(self, *tokens):
        return frozenset(str(token) for token in tokens)


@lru_cache(maxsize=1)
def _parser():
    return Lark(FORMULA_GRAMMAR, parser="lalr")


def as_agent_formula(formula) -> AgentFormula:
    """Convert a parsed index (built as a world formula) into an agent formula"""
    if isinstance(formula, AgentFormula):
        return formula
    if isinstance(formula, Falsum):
        return AgentFalsum()
    if isinstance(formula, Atom):
        return AgentAtom(formula.name)
    if isinstance(formula, Not):
        return AgentNot(as_agent_formula(formula.sub))
    if isinstance(formula, And):
        return AgentAnd(as_agent_formula(formula.left), as_agent_formula(formula.right))
    raise FormulaSyntaxError("modal operator inside an agent formula")


def _parse(text: str) -> WorldFormula:
    try:
        tree = _parser().parse(text)
    except UnexpectedEOF as e:
        raise FormulaSyntaxError("unexpected end of input (unbalanced brackets?)") from e
    except UnexpectedInput as e:
        raise FormulaSyntaxError(f"unexpected input {str(e).splitlines()[0]!r}",
                                 getattr(e, "line", None), getattr(e, "column", None)) from e
    try:
        return _FormulaBuilder().transform(tree)
    except VisitError as e:
        if isinstance(e.orig_exc, FormulaSyntaxError):
            raise e.orig_exc
        raise


def _reject(formula, node_type, message):
    if any(isinstance(sub, node_type) for sub in subformulae(formula)):
        raise FormulaSyntaxError(message)


def parse_world(text: str) -> WorldFormula:
    """
    Parse a CIEL world formula

    Args:
        text: Formula text, e.g. "C[doctor] smoking_bad"

    Returns:
        Core WorldFormula
    """
    formula = _parse(text)
    _reject(formula, GroupCommon, "explicit agent groups are GEL syntax, not CIEL")
    return formula


def parse_agent(text: str) -> AgentFormula:
    """Parse a propositional agent formula"""
    formula = _parse(text)
    _reject(formula, (Common, GroupCommon), "modal operator inside an agent formula")
    return as_agent_formula(formula)


def parse_any(text: str) -> WorldFormula:
    """Parse a formula that may mix C[...] and C{...} operators"""
    return _parse(text)


# ---------------------------------------------------------------------------
# Printing
# ---------------------------------------------------------------------------

_IFF, _IMP, _OR, _AND, _UNARY = range(5)


def _match_or(formula):
    # ~(~a & ~b)
    if isinstance(formula, (Not, AgentNot)) and isinstance(formula.sub, (And, AgentAnd)):
        left, right = formula.sub.left, formula.sub.right
        if isinstance(left, (Not, AgentNot)) and isinstance(right, (Not, AgentNot)):
            return left.sub, right.sub
    return None


def _match_implies(formula):
    # ~(a & ~b)
    if isinstance(formula, (Not, AgentNot)) and isinstance(formula.sub, (And, AgentAnd)):
        if isinstance(formula.sub.right, (Not, AgentNot)):
            return formula.sub.left, formula.sub.right.sub
    return None


def _wrap(text, own, required):
    return f"({text})" if own < required else text


def _fmt(formula, sugar) -> Tuple[str, int]:
    if isinstance(formula, (Falsum, AgentFalsum)):
        return "false", _UNARY
    if isinstance(formula, (Atom, AgentAtom)):
        return formula.name, _UNARY
    if isinstance(formula, (Not, AgentNot)):
        if sugar:
            if isinstance(formula.sub, (Falsum, AgentFalsum)):
                return "true", _UNARY
            pair = _match_or(formula)
            if pair:
                return f"{_show(pair[0], _OR, sugar)} | {_show(pair[1], _AND, sugar)}", _OR
            pair = _match_implies(formula)
            if pair:
                return f"{_show(pair[0], _OR, sugar)} -> {_show(pair[1], _IMP, sugar)}", _IMP
            if isinstance(formula.sub, Common) and isinstance(formula.sub.body, Not):
                index = _show(formula.sub.index, _IFF, sugar)
                return f"P[{index}] {_show(formula.sub.body.sub, _UNARY, sugar)}", _UNARY
        return f"~{_show(formula.sub, _UNARY, sugar)}", _UNARY
    if isinstance(formula, (And, AgentAnd)):
        return f"{_show(formula.left, _AND, sugar)} & {_show(formula.right, _UNARY, sugar)}", _AND
    if isinstance(formula, Common):
        return f"C[{_show(formula.index, _IFF, sugar)}] {_show(formula.body, _UNARY, sugar)}", _UNARY
    if isinstance(formula, GroupCommon):
        names = ",".join(sorted(formula.group))
        return f"C{{{names}}} {_show(formula.body, _UNARY, sugar)}", _UNARY
    raise TypeError(f"not a formula: {formula!r}")


def _show(formula, required, sugar):
    text, own = _fmt(formula, sugar)
    return _wrap(text, own, required)


def to_text(formula, sugar: bool = False) -> str:
    """
    Print a formula in the concrete grammar

    Args:
        formula: Agent or world formula
        sugar: Recover |, ->, P[...] and true from their encodings

    Returns:
        Text that parses back to the same formula
    """
    return _show(formula, _IFF, sugar)


@lru_cache(maxsize=65536)
def formula_key(formula) -> Tuple[int, str]:
    """Deterministic sort key: smaller formulas first, then by text"""
    return size(formula), to_text(formula)
