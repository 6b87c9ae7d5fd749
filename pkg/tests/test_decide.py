"""
Tests for type enumeration, elimination and the satisfiability/validity verdicts
"""
import itertools

import numpy as np
import pytest

from ciel_toolkit.config_manager import ConfigManager
from ciel_toolkit.core.agentlogic import AgentTheory
from ciel_toolkit.core.decide import (DecisionLimits, assert_truth_lemma, canonical_pseudo_model, eliminate,
                                      find_countermodel, gel_sat, prepare, sat, type_world, valid)
from ciel_toolkit.core.errors import ResourceLimitError
from ciel_toolkit.core.formula import And, Common, Falsum, Not, parse_any, parse_world
from ciel_toolkit.core.generators import (AXIOM_SCHEMATA, RULE_SCHEMATA, axiom_instance, gel_corpus, make_rng,
                                          random_world_formula)
from ciel_toolkit.core.semantics import check, check_pseudo, validate
from ciel_toolkit.core.translate import gel_to_ciel

EXACTLY_ONE = AgentTheory.from_lines(["h1 | h2", "~(h1 & h2)"])


def naive_types(ts):
    """Rows allowed by the coherence conditions, found by trying every assignment to the columns"""
    position = {f: i for i, f in enumerate(ts.columns)}

    def value(formula, bits):
        if isinstance(formula, Falsum):
            return False
        if isinstance(formula, Not):
            return not value(formula.sub, bits)
        return bits[position[formula]]

    commons = [f for f in ts.columns if isinstance(f, Common)]
    rows = set()
    for bits in itertools.product((False, True), repeat=len(ts.columns)):
        coherent = True
        for formula in ts.columns:
            if isinstance(formula, And):
                coherent &= bits[position[formula]] == (value(formula.left, bits) and value(formula.right, bits))
            elif isinstance(formula, Common):
                group = ts.denotations[formula]
                if not group:
                    coherent &= bits[position[formula]] == value(formula.body, bits)
                elif bits[position[formula]]:
                    coherent &= value(formula.body, bits)
                    coherent &= all(bits[position[other]] for other in commons
                                    if other.body == formula.body and ts.denotations[other]
                                    and ts.denotations[other] <= group)
        if coherent:
            rows.add(bits)
    return rows


class TestTypeEnumeration:

    @pytest.mark.parametrize("text", ["C[q] p", "C[q] p & ~C[r] p", "p & C[q & r] q", "C[false] p"])
    def test_matches_naive_enumeration(self, text):
        ts = prepare(parse_world(text))
        rows = {tuple(bool(b) for b in row) for row in ts.matrix.tolist()}
        assert len(rows) == ts.size
        assert rows == naive_types(ts)

    def test_single_common_formula(self):
        # p false leaves one type; p true allows any down-closed choice of C[q] p and C[~q] p
        assert prepare(parse_world("C[q] p")).size == 5

    def test_type_cap(self):
        with pytest.raises(ResourceLimitError) as excinfo:
            prepare(parse_world("C[q] p & C[r] (p & s)"), limits=DecisionLimits(type_cap=4))
        assert excinfo.value.limit == "types"

    def test_sigma_cap(self):
        with pytest.raises(ResourceLimitError) as excinfo:
            prepare(parse_world("C[q] p & ~C[r] p"), limits=DecisionLimits(sigma_cap=3))
        assert excinfo.value.limit == "sigma"


class TestElimination:

    INDUCTIVE = parse_world("C[q] (p | C[q] p) -> C[q] p")

    def test_obligation_forces_elimination(self):
        result = sat(Not(self.INDUCTIVE))
        assert not result
        assert result.statistics["eliminated"] > 0
        assert valid(self.INDUCTIVE)

    def test_order_does_not_matter(self):
        rng = make_rng(7)
        formulas = [self.INDUCTIVE] + [random_world_formula(rng, agent_atoms=("r",)) for _ in range(15)]
        for formula in formulas:
            ts = prepare(Not(formula))
            at_once = eliminate(ts)
            one_by_one = eliminate(ts, order=rng.permutation(ts.size).tolist())
            assert np.array_equal(at_once.alive, one_by_one.alive)

    def test_threads_do_not_change_the_result(self, rng):
        for _ in range(10):
            ts = prepare(random_world_formula(rng, agent_atoms=("r",)))
            assert np.array_equal(eliminate(ts).alive, eliminate(ts, max_workers=4).alive)

    def test_truth_lemma_on_surviving_types(self, rng):
        for _ in range(20):
            ts = eliminate(prepare(random_world_formula(rng, agent_atoms=("r",))))
            assert_truth_lemma(ts)

    def test_pseudo_model_agrees_with_membership(self, rng):
        for _ in range(10):
            ts = eliminate(prepare(random_world_formula(rng, agent_atoms=("r",))))
            pseudo = canonical_pseudo_model(ts)
            for row in ts.surviving[:10]:
                for formula in ts.sigma:
                    assert check_pseudo(pseudo, type_world(int(row)), formula) == bool(ts.values(formula)[row])


class TestVerdicts:

    @pytest.mark.parametrize("text", [
        "C[q] p -> p",
        "C[q] p -> C[q] C[q] p",
        "~C[q] p -> C[q] ~C[q] p",
        "C[q | r] p -> C[q] p",
        "C[false] p <-> p",
        "C[q] (p -> s) -> C[q] p -> C[q] s",
    ])
    def test_valid(self, text):
        assert valid(parse_world(text))
        assert find_countermodel(parse_world(text)) is None

    @pytest.mark.parametrize("text", ["p -> C[q] p", "C[q] p -> C[q | r] p", "C[q] p -> C[r] p"])
    def test_invalid_with_countermodel(self, text):
        formula = parse_world(text)
        assert not valid(formula)
        model, world = find_countermodel(formula)
        assert validate(model) is model
        assert not check(model, world, formula)

    def test_contradiction(self):
        result = sat(parse_world("p & ~p"))
        assert not result
        assert result.verdict == "UNSAT"
        assert result.witness is None

    def test_witness_satisfies_formula(self, rng):
        for _ in range(30):
            formula = random_world_formula(rng, agent_atoms=("r",))
            result = sat(formula)
            if result:
                assert result.verdict == "SAT"
                assert check(result.witness, result.start, formula)
                assert len(result.witness.worlds) <= result.statistics["surviving"]
                assert len(result.witness.worlds) <= 2 ** result.statistics["sigma_size"]

    def test_statistics(self):
        result = sat(parse_world("C[q] p"))
        assert set(result.statistics) >= {"sigma_size", "agents", "types", "surviving", "eliminated", "rounds",
                                          "witness_worlds"}
        assert result.statistics["types"] == 5

    @pytest.mark.parametrize("longest", [1, 2])
    def test_iterated_knowledge_does_not_give_common_knowledge(self, longest):
        chains = ["".join(f"C[{index}] " for index in chain) + "p"
                  for length in range(1, longest + 1)
                  for chain in itertools.product("ab", repeat=length)]
        formula = parse_world(" & ".join(["~C[a | b] p"] + chains))
        result = sat(formula)
        assert result.satisfiable
        assert check(result.witness, result.start, formula)
        assert len(result.witness.worlds) <= 2 ** result.statistics["sigma_size"]

    @pytest.mark.slow
    @pytest.mark.parametrize("schema", AXIOM_SCHEMATA + RULE_SCHEMATA)
    def test_twenty_instances_per_schema_are_valid(self, schema):
        rng = make_rng(2024)
        limits = DecisionLimits(sigma_cap=40, type_cap=2 ** 14)
        decided = 0
        for _ in range(200):
            formula = axiom_instance(schema, rng, depth=2, agent_atoms=("q", "r"))
            try:
                verdict = valid(formula, limits=limits)
            except ResourceLimitError:
                continue
            assert verdict, str(formula)
            decided += 1
            if decided == 20:
                break
        assert decided == 20

    def test_theory_changes_the_verdict(self):
        formula = parse_world("C[h1] p & ~C[h1 | h2] p")
        assert sat(formula, EXACTLY_ONE)
        assert not sat(formula, AgentTheory.from_lines(["h2 -> h1"]))

    def test_limits_from_config(self, tmp_path):
        config = ConfigManager(str(tmp_path / "ciel.json"))
        config.limits.type_cap = 3
        limits = DecisionLimits.from_config(config)
        assert limits.type_cap == 3
        assert limits.sigma_cap == 256
        with pytest.raises(ResourceLimitError):
            sat(parse_world("C[q] p"), limits=limits)


class TestGelOracle:

    def test_simple_verdicts(self):
        assert gel_sat(parse_any("~C{a} p & p"))
        assert not gel_sat(parse_any("C{a,b} p & ~C{a} p"))
        assert not gel_sat(parse_any("C{a} p & ~p"))

    def test_agrees_with_translation_on_the_whole_corpus(self):
        corpus = list(gel_corpus())
        assert len(corpus) > 200
        for formula in corpus:
            assert gel_sat(formula) == sat(gel_to_ciel(formula)).satisfiable, str(formula)
