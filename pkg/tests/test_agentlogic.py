"""
Tests for the propositional agent logic and the filtered agent model
"""
import itertools

import numpy as np
import pytest

from ciel_toolkit.core.agentlogic import (AgentTheory, characteristic, clo_ag, denote, entails, evaluate,
                                          evaluate_table, filtered_model, load_theory, sat_agent,
                                          truth_table)
from ciel_toolkit.core.errors import ResourceLimitError, UnsatisfiableTheoryError
from ciel_toolkit.core.formula import (AgentAnd, AgentAtom, AgentFalsum, AgentNot, disjoin,
                                       disjunction, parse_agent, subformulae)
from ciel_toolkit.core.generators import random_agent_formula

q, r = AgentAtom("q"), AgentAtom("r")
h1, h2 = AgentAtom("h1"), AgentAtom("h2")
EXACTLY_ONE = AgentTheory.from_lines(["h1 | h2", "~(h1 & h2)"])


def test_truth_table_order():
    table = truth_table(["a", "b"])
    assert table.tolist() == [[False, False], [False, True], [True, False], [True, True]]
    assert truth_table([]).shape == (1, 0)


def test_single_atom_gives_two_agents():
    model = filtered_model([q])
    assert len(model.agents) == 2
    assert sorted(agent.value("q") for agent in model.agents) == [False, True]


def test_theory_restricts_agents():
    model = filtered_model([h1, h2], EXACTLY_ONE)
    assert len(model.agents) == 2
    for agent in model.agents:
        assert agent.value("h1") != agent.value("h2")


def test_contradiction_denotes_nobody():
    model = filtered_model([AgentAnd(q, AgentNot(q))])
    assert len(model.agents) == 2
    assert denote(AgentAnd(q, AgentNot(q)), model) == frozenset()


def test_unsatisfiable_theory():
    with pytest.raises(UnsatisfiableTheoryError):
        filtered_model([q], AgentTheory(frozenset({q, AgentNot(q)})))


def test_atom_cap():
    atoms = [AgentAtom(f"x{i}") for i in range(5)]
    with pytest.raises(ResourceLimitError):
        filtered_model(atoms, atom_cap=4)


class TestDenotation:

    def test_falsum_and_tautology(self):
        model = filtered_model([q, r])
        assert denote(AgentFalsum(), model) == frozenset()
        assert denote(disjunction(q, AgentNot(q)), model) == frozenset(model.agents)

    def test_characteristic_formulas_denote_one_agent(self):
        model = filtered_model([q, r])
        for agent in model.agents:
            assert denote(characteristic(agent, model), model) == {agent}

    def test_characteristic_of_single_atom(self):
        model = filtered_model([q])
        agent = next(a for a in model.agents if a.value("q"))
        assert characteristic(agent, model) == q

    def test_characteristic_under_theory(self):
        model = filtered_model([h1, h2], EXACTLY_ONE)
        agent = next(a for a in model.agents if a.value("h1"))
        assert characteristic(agent, model) == AgentAnd(h1, AgentNot(h2))
        assert denote(characteristic(agent, model), model) == {agent}

    def test_boolean_homomorphism(self, rng):
        model = filtered_model([q, r, AgentAtom("s")])
        everyone = frozenset(model.agents)
        for _ in range(100):
            a = random_agent_formula(rng, ("q", "r", "s"))
            b = random_agent_formula(rng, ("q", "r", "s"))
            assert denote(AgentNot(a), model) == everyone - denote(a, model)
            assert denote(AgentAnd(a, b), model) == denote(a, model) & denote(b, model)

    def test_missing_atom_is_false(self):
        model = filtered_model([q])
        assert denote(AgentAtom("unknown"), model) == frozenset()


class TestFilteredModelProperties:

    @pytest.fixture
    def sigma(self):
        formulas = set()
        for formula in [parse_agent("q & ~r"), parse_agent("r | s")]:
            formulas |= subformulae(formula)
        return formulas

    def test_agents_are_distinguishable(self, sigma):
        model = filtered_model(sigma)
        for a, b in itertools.combinations(model.agents, 2):
            assert any(evaluate(f, a.assignment) != evaluate(f, b.assignment) for f in sigma)

    def test_every_satisfiable_subset_is_realized(self, sigma):
        model = filtered_model(sigma)
        ordered = sorted(sigma, key=str)
        for bits in itertools.product((False, True), repeat=len(ordered)):
            literals = [f if bit else AgentNot(f) for f, bit in zip(ordered, bits)]
            if sat_agent(literals):
                assert any(all(evaluate(lit, agent.assignment) for lit in literals) for agent in model.agents)

    def test_agent_count_bound(self, sigma):
        assert len(filtered_model(sigma).agents) <= 2 ** len(sigma)

    def test_formulas_entail_disjunction_of_their_agents(self, sigma):
        model = filtered_model(sigma)
        for formula in sigma:
            agents = denote(formula, model)
            cover = disjoin([characteristic(a, model) for a in sorted(agents, key=str)], agent=True)
            assert entails(formula, cover)

    def test_clo_ag_adds_characteristics(self, sigma):
        model = filtered_model(sigma)
        extended = clo_ag(sigma, model)
        assert frozenset(sigma) <= extended
        for agent in model.agents:
            assert characteristic(agent, model) in extended

    def test_representatives_are_least_valuations(self):
        model = filtered_model([q], AgentTheory(frozenset({disjunction(AgentAtom("a"), AgentAtom("b"))})))
        # valuations over (a, b, q); the least a|b valuation is a=0, b=1
        assert [agent.name for agent in model.agents] == ["a_010", "a_011"]


class TestOracles:

    def test_entails(self):
        assert entails(AgentAnd(q, r), q)
        assert not entails(q, AgentAnd(q, r))

    def test_entails_from_characteristic(self):
        model = filtered_model([q, r])
        psi = disjunction(q, r)
        for agent in denote(psi, model):
            assert entails(characteristic(agent, model), psi)

    def test_sat_agent(self):
        assert not sat_agent([q, AgentNot(q)])
        assert sat_agent([q, r])
        assert sat_agent([])

    def test_entailment_under_theory(self):
        assert entails(h1, AgentNot(h2), EXACTLY_ONE)
        assert not entails(h1, AgentNot(h2))

    def test_vectorized_and_pointwise_evaluation_agree(self, rng):
        names = ["q", "r", "s"]
        table = truth_table(names)
        columns = {name: i for i, name in enumerate(names)}
        for _ in range(50):
            formula = random_agent_formula(rng, names, depth=3)
            expected = np.array([evaluate(formula, dict(zip(names, row))) for row in table.tolist()])
            assert (evaluate_table(formula, table, columns) == expected).all()


def test_load_theory(tmp_path):
    path = tmp_path / "exactly_one.theory"
    path.write_text("# one invisible bit\nh1 | h2\n~(h1 & h2)  # not both\n\n", encoding="utf-8")
    theory = load_theory(str(path))
    assert theory == EXACTLY_ONE


def test_load_unsatisfiable_theory(tmp_path):
    path = tmp_path / "bad.theory"
    path.write_text("q\n~q\n", encoding="utf-8")
    with pytest.raises(UnsatisfiableTheoryError):
        load_theory(str(path))
