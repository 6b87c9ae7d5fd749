"""
Hilbert-style derivations for CIEL

Every line carries an explicit justification: an axiom schema with its metavariables
instantiated, a tautology, modus ponens, necessitation or antimonotonicity (AM) with
its agent-logic side condition. Checking is purely syntactic apart from the tautology
test and the AM entailment.
"""
import logging
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass
from typing import ClassVar, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from ..performance import performance_monitor
from .agentlogic import AgentTheory, entails, truth_table
from .decide import sat
from .errors import DerivationFormatError, FormulaSyntaxError, ResourceLimitError
from .formula import (AgentFalsum, AgentFormula, And, Common, Falsum, Not,
                      WorldFormula, conjoin, disjoin, disjunction, formula_key, implication,
                      parse_agent, parse_world, to_text)

logger = logging.getLogger(__name__)

DEFAULT_TAUT_LETTER_CAP = 20


# ---------------------------------------------------------------------------
# Axiom schemata
# ---------------------------------------------------------------------------

def ax_t(index: AgentFormula, body: WorldFormula) -> WorldFormula:
    """C[psi] phi -> phi"""
    return implication(Common(index, body), body)


def ax_bot(body: WorldFormula) -> WorldFormula:
    """phi -> C[false] phi"""
    return implication(body, Common(AgentFalsum(), body))


def ax_k(index: AgentFormula, antecedent: WorldFormula, consequent: WorldFormula) -> WorldFormula:
    """C[psi](phi -> chi) -> (C[psi] phi -> C[psi] chi)"""
    return implication(Common(index, implication(antecedent, consequent)),
                       implication(Common(index, antecedent), Common(index, consequent)))


def ax_4(index: AgentFormula, body: WorldFormula) -> WorldFormula:
    """C[psi] phi -> C[psi] C[psi] phi"""
    return implication(Common(index, body), Common(index, Common(index, body)))


def ax_5(index: AgentFormula, body: WorldFormula) -> WorldFormula:
    """~C[psi] phi -> C[psi] ~C[psi] phi"""
    return implication(Not(Common(index, body)), Common(index, Not(Common(index, body))))


def ax_ind(left: AgentFormula, right: AgentFormula, body: WorldFormula) -> WorldFormula:
    """C[psi | chi](phi -> C[psi] phi & C[chi] phi) -> (phi -> C[psi | chi] phi)"""
    union = disjunction(left, right)
    return implication(Common(union, implication(body, And(Common(left, body), Common(right, body)))),
                       implication(body, Common(union, body)))


def am_conclusion(narrow: AgentFormula, wide: AgentFormula, body: WorldFormula) -> WorldFormula:
    """C[psi] phi -> C[gamma] phi, derivable when gamma entails psi"""
    return implication(Common(wide, body), Common(narrow, body))


# ---------------------------------------------------------------------------
# Justifications
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Justification:
    rule: ClassVar[str] = ""

    @property
    def references(self) -> Tuple[int, ...]:
        return ()

    def arguments(self) -> List[str]:
        return []


@dataclass(frozen=True)
class Taut(Justification):
    rule: ClassVar[str] = "Taut"


@dataclass(frozen=True)
class AxT(Justification):
    rule: ClassVar[str] = "T"
    index: AgentFormula
    body: WorldFormula

    def instance(self):
        return ax_t(self.index, self.body)

    def arguments(self):
        return [_show(self.index), _show(self.body)]


@dataclass(frozen=True)
class AxBot(Justification):
    rule: ClassVar[str] = "Bot"
    body: WorldFormula

    def instance(self):
        return ax_bot(self.body)

    def arguments(self):
        return [_show(self.body)]


@dataclass(frozen=True)
class AxK(Justification):
    rule: ClassVar[str] = "K"
    index: AgentFormula
    antecedent: WorldFormula
    consequent: WorldFormula

    def instance(self):
        return ax_k(self.index, self.antecedent, self.consequent)

    def arguments(self):
        return [_show(self.index), _show(self.antecedent), _show(self.consequent)]


@dataclass(frozen=True)
class Ax4(Justification):
    rule: ClassVar[str] = "4"
    index: AgentFormula
    body: WorldFormula

    def instance(self):
        return ax_4(self.index, self.body)

    def arguments(self):
        return [_show(self.index), _show(self.body)]


@dataclass(frozen=True)
class Ax5(Justification):
    rule: ClassVar[str] = "5"
    index: AgentFormula
    body: WorldFormula

    def instance(self):
        return ax_5(self.index, self.body)

    def arguments(self):
        return [_show(self.index), _show(self.body)]


@dataclass(frozen=True)
class AxInd(Justification):
    rule: ClassVar[str] = "Ind"
    left: AgentFormula
    right: AgentFormula
    body: WorldFormula

    def instance(self):
        return ax_ind(self.left, self.right, self.body)

    def arguments(self):
        return [_show(self.left), _show(self.right), _show(self.body)]


@dataclass(frozen=True)
class MP(Justification):
    """Modus ponens: line `major` is line `minor` -> current"""
    rule: ClassVar[str] = "MP"
    minor: int
    major: int

    @property
    def references(self):
        return (self.minor, self.major)

    def arguments(self):
        return [str(self.minor), str(self.major)]


@dataclass(frozen=True)
class Nec(Justification):
    """Necessitation: current is C[index] of line `premise`"""
    rule: ClassVar[str] = "Nec"
    premise: int
    index: AgentFormula

    @property
    def references(self):
        return (self.premise,)

    def arguments(self):
        return [str(self.premise), _show(self.index)]


@dataclass(frozen=True)
class AM(Justification):
    """
    Antimonotonicity in the index, from the side condition narrow |= wide

    Without a premise line the current line is C[wide] phi -> C[narrow] phi; with one,
    the premise is C[wide] phi and the current line is C[narrow] phi.
    """
    rule: ClassVar[str] = "AM"
    premise: Optional[int]
    narrow: AgentFormula
    wide: AgentFormula

    @property
    def references(self):
        return () if self.premise is None else (self.premise,)

    def arguments(self):
        return ["-" if self.premise is None else str(self.premise), _show(self.narrow), _show(self.wide)]


AXIOMS = (AxT, AxBot, AxK, Ax4, Ax5, AxInd)
RULES = {cls.rule: cls for cls in (Taut, MP, Nec, AM) + AXIOMS}


def _show(formula) -> str:
    return to_text(formula, sugar=True)


@dataclass(frozen=True)
class DerivationLine:
    formula: WorldFormula
    justification: Justification


@dataclass(frozen=True)
class Derivation:
    lines: Tuple[DerivationLine, ...]

    @property
    def conclusion(self) -> Optional[WorldFormula]:
        return self.lines[-1].formula if self.lines else None

    def __len__(self):
        return len(self.lines)


@dataclass(frozen=True)
class DerivationReport:
    """Verdict of check_derivation; failing_line is 1-based"""
    accepted: bool
    failing_line: Optional[int] = None
    reason: str = ""

    def __bool__(self):
        return self.accepted


# ---------------------------------------------------------------------------
# Tautologies
# ---------------------------------------------------------------------------

def _letters(formula, found):
    if isinstance(formula, Falsum):
        return
    if isinstance(formula, Not):
        _letters(formula.sub, found)
    elif isinstance(formula, And):
        _letters(formula.left, found)
        _letters(formula.right, found)
    else:
        found.add(formula)


def _skeleton_value(formula, table, columns):
    if isinstance(formula, Falsum):
        return np.zeros(table.shape[0], dtype=bool)
    if isinstance(formula, Not):
        return ~_skeleton_value(formula.sub, table, columns)
    if isinstance(formula, And):
        return _skeleton_value(formula.left, table, columns) & _skeleton_value(formula.right, table, columns)
    return table[:, columns[formula]]


def is_tautology(formula: WorldFormula, letter_cap: int = DEFAULT_TAUT_LETTER_CAP) -> bool:
    """
    Propositional validity of the Boolean skeleton

    Atoms and C-formulas are the letters; every assignment to them is evaluated.
    """
    found = set()
    _letters(formula, found)
    letters = sorted(found, key=formula_key)
    if len(letters) > letter_cap:
        raise ResourceLimitError("taut_letters", len(letters), letter_cap)
    table = truth_table(letters)
    columns = {letter: i for i, letter in enumerate(letters)}
    return bool(_skeleton_value(formula, table, columns).all())


# ---------------------------------------------------------------------------
# Checking
# ---------------------------------------------------------------------------

def _split_implication(formula) -> Optional[Tuple[WorldFormula, WorldFormula]]:
    if isinstance(formula, Not) and isinstance(formula.sub, And) and isinstance(formula.sub.right, Not):
        return formula.sub.left, formula.sub.right.sub
    return None


def _check_line(derivation: Derivation, number: int, theory: Optional[AgentTheory],
                letter_cap: int) -> Optional[str]:
    """Reason the line fails, or None when it is correctly justified"""
    line = derivation.lines[number - 1]
    formula, just = line.formula, line.justification

    def cited(n):
        return derivation.lines[n - 1].formula

    if isinstance(just, Taut):
        return None if is_tautology(formula, letter_cap) else "not a propositional tautology"
    if isinstance(just, AXIOMS):
        if formula != just.instance():
            return f"does not match axiom {just.rule} instantiated with {', '.join(just.arguments())}"
        return None
    if isinstance(just, MP):
        if cited(just.major) != implication(cited(just.minor), formula):
            return f"line {just.major} is not line {just.minor} -> this line"
        return None
    if isinstance(just, Nec):
        if formula != Common(just.index, cited(just.premise)):
            return f"not C[{_show(just.index)}] of line {just.premise}"
        return None
    if isinstance(just, AM):
        if just.premise is None:
            parts = _split_implication(formula)
            if (parts is None or not isinstance(parts[0], Common)
                    or formula != am_conclusion(just.narrow, just.wide, parts[0].body)):
                return f"not of the form C[{_show(just.wide)}] phi -> C[{_show(just.narrow)}] phi"
        else:
            premise = cited(just.premise)
            if not isinstance(premise, Common) or premise != Common(just.wide, premise.body):
                return f"line {just.premise} is not a C[{_show(just.wide)}]-formula"
            if formula != Common(just.narrow, premise.body):
                return f"not C[{_show(just.narrow)}] of the body of line {just.premise}"
        if not entails(just.narrow, just.wide, theory):
            return f"side condition fails: {_show(just.narrow)} does not entail {_show(just.wide)}"
        return None
    return f"unknown justification {just!r}"


def check_derivation(derivation: Derivation, theory: Optional[AgentTheory] = None,
                     max_workers: int = 1, letter_cap: int = DEFAULT_TAUT_LETTER_CAP) -> DerivationReport:
    """
    Check every line of a derivation

    References are checked in order first; the lines are then checked independently,
    in parallel when max_workers > 1.

    Args:
        derivation: Derivation to check
        theory: Agent theory for the AM side conditions
        max_workers: Threads for the line checks
        letter_cap: Maximum number of letters in a tautology check

    Returns:
        DerivationReport naming the first failing line
    """
    for number, line in enumerate(derivation.lines, start=1):
        for ref in line.justification.references:
            if not 1 <= ref < number:
                return DerivationReport(False, number, f"bad reference to line {ref}")

    numbers = range(1, len(derivation.lines) + 1)
    failures: Dict[int, str] = {}
    with performance_monitor.track("derivation_check", lines=len(derivation.lines)):
        if max_workers > 1:
            with ThreadPoolExecutor(max_workers=max_workers) as executor:
                futures = {executor.submit(_check_line, derivation, n, theory, letter_cap): n for n in numbers}
                for future in as_completed(futures):
                    reason = future.result()
                    if reason is not None:
                        failures[futures[future]] = reason
        else:
            for n in numbers:
                reason = _check_line(derivation, n, theory, letter_cap)
                if reason is not None:
                    failures[n] = reason

    if failures:
        first = min(failures)
        logger.info(f"Derivation rejected at line {first}: {failures[first]}")
        return DerivationReport(False, first, failures[first])
    logger.info(f"Derivation of {len(derivation.lines)} lines accepted")
    return DerivationReport(True)


def consistent(formulas: Iterable[WorldFormula], theory: Optional[AgentTheory] = None, limits=None) -> bool:
    """A finite set is consistent exactly when its conjunction is satisfiable"""
    return sat(conjoin(list(formulas)), theory, limits).satisfiable


# ---------------------------------------------------------------------------
# Proof files
# ---------------------------------------------------------------------------

def _parse_reference(text: str, number: int) -> int:
    try:
        return int(text)
    except ValueError:
        raise DerivationFormatError(f"expected a line number, got {text!r}", number)


def _parse_justification(rule: str, args: List[str], number: int) -> Justification:
    cls = RULES.get(rule)
    if cls is None:
        raise DerivationFormatError(f"unknown rule {rule!r}", number)
    arity = {Taut: 0, AxT: 2, AxBot: 1, AxK: 3, Ax4: 2, Ax5: 2, AxInd: 3, MP: 2, Nec: 2, AM: 3}[cls]
    if len(args) != arity:
        raise DerivationFormatError(f"rule {rule} takes {arity} arguments, got {len(args)}", number)
    try:
        if cls is Taut:
            return Taut()
        if cls is AxBot:
            return AxBot(parse_world(args[0]))
        if cls in (AxT, Ax4, Ax5):
            return cls(parse_agent(args[0]), parse_world(args[1]))
        if cls is AxK:
            return AxK(parse_agent(args[0]), parse_world(args[1]), parse_world(args[2]))
        if cls is AxInd:
            return AxInd(parse_agent(args[0]), parse_agent(args[1]), parse_world(args[2]))
        if cls is MP:
            return MP(_parse_reference(args[0], number), _parse_reference(args[1], number))
        if cls is Nec:
            return Nec(_parse_reference(args[0], number), parse_agent(args[1]))
        premise = None if args[0] == "-" else _parse_reference(args[0], number)
        return AM(premise, parse_agent(args[1]), parse_agent(args[2]))
    except FormulaSyntaxError as e:
        raise DerivationFormatError(f"bad argument for {rule}: {e}", number) from e


def parse_derivation(text: str) -> Derivation:
    """
    Parse the proof file format

    One step per line, `<n>. <formula> ; <RULE> <arg>, <arg>, ...`; `#` starts a comment.
    """
    lines = []
    for raw in text.splitlines():
        content = raw.split("#", 1)[0].strip()
        if not content:
            continue
        number = len(lines) + 1
        head, sep, tail = content.partition(";")
        label, dot, formula_text = head.partition(".")
        if not sep or not dot:
            raise DerivationFormatError("expected '<n>. <formula> ; <RULE> <args>'", number)
        if label.strip() != str(number):
            raise DerivationFormatError(f"step labelled {label.strip()!r}, expected {number}", number)
        try:
            formula = parse_world(formula_text.strip())
        except FormulaSyntaxError as e:
            raise DerivationFormatError(f"bad formula: {e}", number) from e
        parts = tail.strip().split(None, 1)
        if not parts:
            raise DerivationFormatError("missing rule name", number)
        args = [a.strip() for a in parts[1].split(",")] if len(parts) > 1 else []
        lines.append(DerivationLine(formula, _parse_justification(parts[0], args, number)))
    return Derivation(tuple(lines))


def load_derivation(path: str) -> Derivation:
    with open(path, "r", encoding="utf-8") as f:
        return parse_derivation(f.read())


def format_derivation(derivation: Derivation) -> str:
    out = []
    for number, line in enumerate(derivation.lines, start=1):
        just = line.justification
        args = ", ".join(just.arguments())
        out.append(f"{number}. {_show(line.formula)} ; {just.rule}{' ' + args if args else ''}")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# Generalized induction
# ---------------------------------------------------------------------------

class _Builder:
    """Appends derivation lines and returns their 1-based numbers"""

    def __init__(self, lines: Sequence[DerivationLine] = ()):
        self.lines: List[DerivationLine] = list(lines)

    def add(self, formula, justification) -> int:
        self.lines.append(DerivationLine(formula, justification))
        return len(self.lines)

    def formula(self, number: int) -> WorldFormula:
        return self.lines[number - 1].formula

    def axiom(self, justification) -> int:
        return self.add(justification.instance(), justification)

    def mp(self, minor: int, major: int) -> int:
        _, consequent = _split_implication(self.formula(major))
        return self.add(consequent, MP(minor, major))

    def taut(self, formula) -> int:
        return self.add(formula, Taut())

    def syllogism(self, first: int, second: int) -> int:
        """From a -> b and b -> c derive a -> c"""
        a, b = _split_implication(self.formula(first))
        _, c = _split_implication(self.formula(second))
        bridge = self.taut(implication(implication(a, b), implication(implication(b, c), implication(a, c))))
        return self.mp(second, self.mp(first, bridge))

    def monotone(self, index: AgentFormula, premise: int) -> int:
        """From a -> b derive C[index] a -> C[index] b"""
        a, b = _split_implication(self.formula(premise))
        boxed = self.add(Common(index, self.formula(premise)), Nec(premise, index))
        k = self.axiom(AxK(index, a, b))
        return self.mp(boxed, k)


def induction_formula(indices: Sequence[AgentFormula], body: WorldFormula) -> WorldFormula:
    """C[psi1 | ... | psin](phi -> C[psi1] phi & ... & C[psin] phi) -> (phi -> C[psi1 | ... | psin] phi)"""
    union = disjoin(indices, agent=True)
    each = conjoin([Common(index, body) for index in indices])
    return implication(Common(union, implication(body, each)), implication(body, Common(union, body)))


def gen_ind_n(n: int, indices: Sequence[AgentFormula], body: WorldFormula) -> Derivation:
    """
    Derivation of the induction axiom generalized to n disjuncts

    Args:
        n: Number of disjuncts, n >= 0
        indices: psi1..psin
        body: phi

    Returns:
        Derivation whose last line is induction_formula(indices[:n], body)
    """
    if n < 0 or len(indices) < n:
        raise ValueError(f"need n >= 0 and at least n indices, got n={n} with {len(indices)}")
    indices = list(indices[:n])
    builder = _Builder()
    if n == 0:
        bot = builder.axiom(AxBot(body))
        target = induction_formula([], body)
        antecedent, _ = _split_implication(target)
        weaken = builder.taut(implication(builder.formula(bot), implication(antecedent, builder.formula(bot))))
        builder.mp(bot, weaken)
    elif n == 1:
        builder.axiom(AxT(indices[0], implication(body, Common(indices[0], body))))
    else:
        builder.axiom(AxInd(indices[0], indices[1], body))
        for m in range(2, n):
            _induction_step(builder, indices[:m], indices[m], body)
    derivation = Derivation(tuple(builder.lines))
    logger.debug(f"Generated induction derivation for n={n} with {len(derivation)} lines")
    return derivation


def _induction_step(builder: _Builder, previous: List[AgentFormula], extra: AgentFormula, body: WorldFormula):
    """Extend a derivation ending in the m-disjunct formula to m + 1 disjuncts"""
    hypothesis = len(builder.lines)
    union = disjoin(previous, agent=True)
    wide = disjoin(previous + [extra], agent=True)
    known = conjoin([Common(index, body) for index in previous])
    hyp = implication(body, And(known, Common(extra, body)))
    step = implication(body, And(Common(union, body), Common(extra, body)))
    partial = implication(body, Common(union, body))

    # C[wide] hyp -> C[union](body -> known), then the hypothesis
    narrowed = builder.add(am_conclusion(union, wide, hyp), AM(None, union, wide))
    dropped = builder.taut(implication(hyp, implication(body, known)))
    narrowed = builder.syllogism(narrowed, builder.monotone(union, dropped))
    reaches = builder.syllogism(narrowed, hypothesis)

    # C[wide] hyp -> C[wide] partial, through axiom 4
    boxed = builder.monotone(wide, reaches)
    reaches = builder.syllogism(builder.axiom(Ax4(wide, hyp)), boxed)

    # C[wide] hyp -> C[wide] step
    combine = builder.taut(implication(partial, implication(hyp, step)))
    reaches = builder.syllogism(reaches, builder.monotone(wide, combine))
    distribute = builder.axiom(AxK(wide, hyp, step))
    twice = builder.syllogism(reaches, distribute)
    boxed_hyp = Common(wide, hyp)
    contract = builder.taut(implication(implication(boxed_hyp, implication(boxed_hyp, Common(wide, step))),
                                        implication(boxed_hyp, Common(wide, step))))
    reaches = builder.mp(twice, contract)

    builder.syllogism(reaches, builder.axiom(AxInd(union, extra, body)))
