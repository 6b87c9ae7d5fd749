"""
Tests for the ciel command line
"""
import json
import os

import pytest

from conftest import DERIVATIONS_DIR
from ciel_toolkit.core.formula import parse_world
from ciel_toolkit.core.proofs import check_derivation, parse_derivation
from ciel_toolkit.core.semantics import check
from ciel_toolkit.integration.export_engine import ExportEngine
from ciel_toolkit.main import build_parser, main


@pytest.fixture(autouse=True)
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv("CIEL_CONFIG", raising=False)
    return tmp_path


def run(capsys, *argv):
    status = main(list(argv))
    return status, capsys.readouterr().out


class TestDecide:

    def test_unsat(self, capsys):
        status, out = run(capsys, "sat", "p & ~p")
        assert status == 1
        assert out.splitlines()[0] == "UNSAT"

    def test_valid(self, capsys):
        status, out = run(capsys, "valid", "C[q] p -> p")
        assert status == 0
        assert out.splitlines()[0] == "VALID"

    def test_invalid_writes_countermodel(self, capsys, workdir):
        status, out = run(capsys, "valid", "p -> C[q] p", "--witness", "counter.json")
        assert status == 1
        assert out.splitlines()[0] == "INVALID"
        world = next(line.split(": ")[1] for line in out.splitlines() if line.strip().startswith("world:"))
        model = ExportEngine().load_model(str(workdir / "counter.json"))
        assert not check(model, world, parse_world("p -> C[q] p"))

    def test_sat_statistics_and_csv(self, capsys, workdir):
        status, out = run(capsys, "sat", "C[q] p", "--stats-csv", "stats.csv")
        assert status == 0
        assert "  types: 5" in out
        assert (workdir / "stats.csv").exists()

    def test_formula_from_file(self, capsys, workdir):
        (workdir / "formula.txt").write_text("C[q] p & ~p\n", encoding="utf-8")
        status, _ = run(capsys, "sat", "--file", "formula.txt")
        assert status == 1

    def test_type_cap_override(self, capsys):
        status, _ = run(capsys, "--cap-types", "3", "sat", "C[q] p")
        assert status == 3

    def test_unwritable_witness(self, capsys, workdir):
        (workdir / "blocker").write_text("")
        status, _ = run(capsys, "sat", "C[q] p", "--witness", "blocker/w.json")
        assert status == 2

    def test_syntax_error(self, capsys):
        status, _ = run(capsys, "sat", "p &")
        assert status == 2


class TestParseAndCheck:

    def test_parse_gel(self, capsys):
        status, out = run(capsys, "parse", "--syntax", "gel", "C{a,b} p")
        assert status == 0
        assert out.splitlines()[0] == "C{a,b} p"

    def test_parse_mu(self, capsys):
        status, _ = run(capsys, "parse", "--syntax", "mu", "nu z. p & [edge] z")
        assert status == 0

    def test_check(self, capsys, workdir, chain_model):
        ExportEngine().save_model(chain_model, str(workdir / "chain.json"))
        status, out = run(capsys, "check", "C[q] p", "--model", "chain.json", "--world", "x",
                          "--emit-dot", "chain.dot")
        assert (status, out.strip()) == (0, "true")
        assert (workdir / "chain.dot").exists()
        status, out = run(capsys, "check", "C[q | r] p", "--model", "chain.json", "--world", "x")
        assert (status, out.strip()) == (1, "false")

    def test_theory_violation_is_reported(self, capsys, workdir, chain_model):
        path = ExportEngine().save_model(chain_model, str(workdir / "chain.json"))
        data = json.loads((workdir / "chain.json").read_text())
        data["theory"] = ["~q"]
        (workdir / "chain.json").write_text(json.dumps(data))
        status = main(["check", "p", "--model", path, "--world", "x"])
        assert status == 2
        assert "agent 'a'" in capsys.readouterr().err

    def test_unknown_world(self, capsys, workdir, chain_model):
        ExportEngine().save_model(chain_model, str(workdir / "chain.json"))
        status, _ = run(capsys, "check", "p", "--model", "chain.json", "--world", "nowhere")
        assert status == 2


class TestTranslate:

    def test_gel_to_ciel(self, capsys):
        status, out = run(capsys, "translate", "gel2ciel", "C{alice,bob} p")
        assert status == 0
        assert parse_world(out.strip()) == parse_world("C[p_alice | p_bob] p")

    def test_ciel_to_gel_lists_agents(self, capsys):
        status, out = run(capsys, "translate", "ciel2gel", "C[q] p")
        assert status == 0
        assert len(out.splitlines()) == 3

    def test_empty_group(self, capsys):
        status, _ = run(capsys, "translate", "ciel2gel", "C[q & ~q] p")
        assert status == 2

    def test_ciel_to_mu(self, capsys):
        status, out = run(capsys, "translate", "ciel2mu", "C[q] p")
        assert status == 0
        assert out.startswith("nu z.")


class TestProve:

    def test_check_corpus_file(self, capsys):
        status, out = run(capsys, "prove", "--check", os.path.join(DERIVATIONS_DIR, "nec_am.prf"))
        assert (status, out.strip()) == (0, "accepted (3 lines)")

    def test_rejected_file(self, capsys, workdir):
        (workdir / "bad.prf").write_text("1. C[q] p ; T q, p\n", encoding="utf-8")
        status, out = run(capsys, "prove", "--check", "bad.prf")
        assert status == 1
        assert out.startswith("rejected at line 1:")

    def test_generate_induction(self, capsys):
        status, out = run(capsys, "prove", "--gen-ind", "3", "--index", "q", "r", "s")
        assert status == 0
        assert check_derivation(parse_derivation(out)).accepted

    def test_index_count_must_match(self, capsys):
        status, _ = run(capsys, "prove", "--gen-ind", "2", "--index", "q")
        assert status == 2


class TestMuddy:

    def test_holds(self, capsys):
        status, out = run(capsys, "muddy", "--n", "1", "--k", "3", "--round", "1")
        assert (status, out.strip()) == (0, "holds")

    def test_fails_without_uncertainty(self, capsys):
        status, out = run(capsys, "muddy", "--n", "1", "--k", "3", "--round", "1", "--drop-uncertainty")
        assert (status, out.strip()) == (1, "fails at 001 in the submodel {001}")

    def test_emit_formulas(self, capsys):
        status, out = run(capsys, "muddy", "--n", "1", "--k", "2", "--round", "1", "--emit-formulas")
        assert status == 0
        assert out.splitlines()[-1].startswith("=> ")

    def test_beyond_the_submodel_cap(self, capsys):
        status, _ = run(capsys, "muddy", "--n", "1", "--k", "4", "--round", "1", "--drop-uncertainty")
        assert status == 3

    def test_bad_dimensions(self, capsys):
        status, _ = run(capsys, "muddy", "--n", "1", "--k", "1", "--round", "1")
        assert status == 2


@pytest.mark.parametrize("argv", [
    ["--seed", "5", "soundness", "--instances", "2", "--models", "3"],
    ["soundness", "--instances", "2", "--models", "3", "--seed", "5"],
])
def test_seed_makes_soundness_runs_repeatable(capsys, argv):
    assert run(capsys, *argv) == run(capsys, *argv)
    assert build_parser().parse_args(argv).seed == 5


def test_soundness(capsys, workdir):
    status, out = run(capsys, "soundness", "--instances", "2", "--models", "3", "--report", "sound.csv")
    assert status == 0
    assert "countermodels" in out
    assert (workdir / "sound.csv").exists()
