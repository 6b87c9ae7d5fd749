"""
Tests for the mu-calculus evaluator, the translation t and the model encodings
"""
import pytest

from ciel_toolkit.core.errors import FormulaSyntaxError, IllFormedFixpointError, ReservedNameError
from ciel_toolkit.core.formula import Atom, parse_world, size
from ciel_toolkit.core.generators import random_ciel_model, random_mu_model, random_world_formula
from ciel_toolkit.core.mucalc import (EDGE, PI1, PI2, MuAnd, MuAtom, MuBox, MuModel, MuNot, MuNu, MuVar,
                                      Program, check_via_mu, ciel_model_to_mu, diamond, mu_eval, mu_fixpoint,
                                      mu_model_to_ciel, mu_size, nu_iterates, parse_mu, to_text, translate_t,
                                      world_element)
from ciel_toolkit.core.semantics import check, validate


@pytest.fixture
def cycle():
    """x0 -> x1 -> x2 -> x0 over the program step; p holds at x0 and x1"""
    domain = ("x0", "x1", "x2")
    return MuModel(domain=domain,
                   transitions={"step": frozenset({("x0", "x1"), ("x1", "x2"), ("x2", "x0")})},
                   valuation={"p": frozenset({"x0", "x1"})})


class TestEvaluation:

    def test_box_and_converse(self, cycle):
        step = Program("step")
        assert mu_eval(cycle, MuBox(step, MuAtom("p"))) == {"x0", "x2"}
        assert mu_eval(cycle, MuBox(step.inverse, MuAtom("p"))) == {"x1", "x2"}

    def test_greatest_fixpoint(self, cycle):
        # always p along step: nothing on the cycle qualifies
        formula = MuNu(MuAnd(MuAtom("p"), MuBox(Program("step"), MuVar())))
        assert mu_eval(cycle, formula) == frozenset()
        assert nu_iterates(cycle, formula)[0] == cycle.domain_set

    def test_least_fixpoint(self, cycle):
        # eventually not p
        formula = mu_fixpoint(MuNot(MuAnd(MuAtom("p"), MuBox(Program("step"), MuNot(MuVar())))))
        assert mu_eval(cycle, formula) == cycle.domain_set

    def test_assignment_for_free_variable(self, cycle):
        assert mu_eval(cycle, MuVar(), {"x1"}) == {"x1"}

    def test_negative_occurrence_is_rejected(self):
        with pytest.raises(IllFormedFixpointError):
            MuNu(MuNot(MuVar()))
        with pytest.raises(IllFormedFixpointError):
            parse_mu("nu z. ~z")

    def test_double_negation_is_positive(self):
        assert MuNu(MuNot(MuNot(MuVar()))).body == MuNot(MuNot(MuVar()))


class TestTextSyntax:

    def test_parse_and_print(self):
        formula = parse_mu("nu z. p & [edge](<pi1> q -> [pi2] z) & [pi2^-](<pi1> q -> [edge^-] z)")
        assert parse_mu(to_text(formula)) == formula
        assert parse_mu(to_text(formula, sugar=False)) == formula

    def test_only_z_is_bound(self):
        with pytest.raises(FormulaSyntaxError):
            parse_mu("nu y. p")

    def test_translations_print_and_reparse(self, rng):
        for _ in range(50):
            formula = translate_t(random_world_formula(rng))
            assert parse_mu(to_text(formula)) == formula

    def test_diamond_sugar(self):
        assert parse_mu("<a> p") == diamond(Program("a"), MuAtom("p"))
        assert to_text(diamond(Program("a", True), MuAtom("p"))) == "<a^-> p"


class TestTranslation:

    def test_common_knowledge_shape(self):
        formula = translate_t(parse_world("C[q] p"))
        assert isinstance(formula, MuNu)
        assert "[edge]" in to_text(formula) and "[pi2^-]" in to_text(formula)

    def test_linear_size(self, rng):
        for _ in range(200):
            formula = random_world_formula(rng)
            assert mu_size(translate_t(formula)) <= 10 * size(formula)

    def test_reserved_names(self):
        with pytest.raises(ReservedNameError):
            translate_t(Atom(EDGE))
        with pytest.raises(ReservedNameError):
            translate_t(parse_world("C[pi1] p"))


class TestModelEncodings:

    def test_encoding_shape(self, two_world_model):
        mu = ciel_model_to_mu(two_world_model)
        assert len(mu.domain) == 2 + 2 + 4
        assert ("w:x", "e:a:y") in mu.transitions[EDGE]
        assert all(y.startswith("a:") for _, y in mu.transitions[PI1])
        assert all(y.startswith("w:") for _, y in mu.transitions[PI2])
        assert mu.valuation["q"] == {"a:a"}
        assert mu.valuation["p"] == {"w:x"}

    def test_forward_agreement(self, rng):
        for _ in range(200):
            model = random_ciel_model(rng)
            formula = random_world_formula(rng)
            denotation = mu_eval(ciel_model_to_mu(model), translate_t(formula))
            for world in model.worlds:
                assert check(model, world, formula) == (world_element(world) in denotation)

    def test_check_via_mu(self, two_world_model):
        for text in ("C[q] p", "C[~q] p", "P[q] ~p", "C[q | ~q] (p | ~p)"):
            formula = parse_world(text)
            for world in two_world_model.worlds:
                assert check_via_mu(two_world_model, world, formula) == check(two_world_model, world, formula)

    def test_reverse_agreement(self, rng):
        for _ in range(100):
            model = random_mu_model(rng)
            decoded = mu_model_to_ciel(model)
            formula = random_world_formula(rng, agent_atoms=("r",))
            denotation = mu_eval(model, translate_t(formula))
            for element in model.domain:
                assert (element in denotation) == check(decoded, element, formula)

    def test_decoded_model_is_valid(self, rng):
        model = random_mu_model(rng, density=0.5)
        decoded = mu_model_to_ciel(model)
        assert validate(decoded) is decoded
        assert set(decoded.agent_model.names) == set(model.domain)

    def test_decoding_reads_edge_through_projections(self):
        model = MuModel(domain=("x", "y", "m"),
                        transitions={EDGE: frozenset({("x", "m")}), PI1: frozenset({("m", "y")}),
                                     PI2: frozenset({("m", "y")})},
                        valuation={})
        decoded = mu_model_to_ciel(model)
        assert ("x", "y") in decoded.indist["y"]
        assert ("y", "x") in decoded.indist["y"]
        assert ("x", "y") not in decoded.indist["x"]
