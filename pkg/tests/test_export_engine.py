import json

import pandas as pd
import pytest

from ciel_toolkit.core.errors import ModelFileError, ModelValidationError
from ciel_toolkit.core.formula import AgentAtom, Atom, parse_world
from ciel_toolkit.core.generators import run_soundness_suite
from ciel_toolkit.core.proofs import gen_ind_n, load_derivation
from ciel_toolkit.core.semantics import check
from ciel_toolkit.integration.export_engine import ExportEngine


def test_model_round_trip(tmp_path, chain_model):
    engine = ExportEngine(report_dir=str(tmp_path))
    path = engine.save_model(chain_model, str(tmp_path / "models" / "chain.json"))
    loaded = engine.load_model(path)
    assert loaded.worlds == chain_model.worlds
    assert check(loaded, "x", parse_world("C[q] p"))


def test_default_names_go_to_the_report_dir(tmp_path, two_world_model):
    engine = ExportEngine(report_dir=str(tmp_path / "reports"))
    path = engine.save_model(two_world_model)
    assert path.startswith(str(tmp_path / "reports"))
    assert path.endswith(".json")


@pytest.mark.parametrize("content, reason", [
    ("[]", "expected a JSON object"),
    ("{\"worlds\": [", "invalid JSON"),
    ("{\"agents\": []}", "missing field"),
])
def test_malformed_model_files(tmp_path, content, reason):
    path = tmp_path / "bad.json"
    path.write_text(content)
    with pytest.raises(ModelFileError) as excinfo:
        ExportEngine(report_dir=str(tmp_path)).load_model(str(path))
    assert reason in str(excinfo.value)
    assert excinfo.value.path == str(path)


def test_theory_violations_keep_their_detail(tmp_path, chain_model):
    engine = ExportEngine(report_dir=str(tmp_path))
    path = engine.save_model(chain_model, str(tmp_path / "chain.json"))
    data = json.loads(open(path, encoding="utf-8").read())
    data["theory"] = ["~q"]
    with open(path, "w", encoding="utf-8") as f:
        json.dump(data, f)
    with pytest.raises(ModelValidationError) as excinfo:
        engine.load_model(path)
    assert "violates theory constraint" in excinfo.value.reason


def test_missing_model_file(tmp_path):
    with pytest.raises(OSError):
        ExportEngine(report_dir=str(tmp_path)).load_model(str(tmp_path / "nowhere.json"))


def test_write_failures_propagate(tmp_path, chain_model):
    (tmp_path / "blocker").write_text("")
    with pytest.raises(OSError):
        ExportEngine(report_dir=str(tmp_path)).save_model(chain_model, str(tmp_path / "blocker" / "m.json"))


def test_dot_file(tmp_path, chain_model):
    path = ExportEngine(report_dir=str(tmp_path)).export_dot(chain_model, str(tmp_path / "chain.dot"))
    assert '"x" -- "y"' in open(path, encoding="utf-8").read()


def test_statistics_rows_are_appended(tmp_path):
    engine = ExportEngine(report_dir=str(tmp_path))
    path = str(tmp_path / "stats.csv")
    engine.export_statistics_csv({"types": 5, "rounds": 0}, path, formula="C[q] p")
    engine.export_statistics_csv({"types": 2, "rounds": 1}, path, formula="p & ~p")
    frame = pd.read_csv(path)
    assert list(frame["types"]) == [5, 2]
    assert list(frame["formula"]) == ["C[q] p", "p & ~p"]
    assert engine.export_statistics_csv({}, path) is None


def test_soundness_report(tmp_path):
    records = run_soundness_suite(instances=2, models=3, schemata=("T",))
    path = ExportEngine(report_dir=str(tmp_path)).export_soundness_report(records, str(tmp_path / "s.csv"))
    assert len(pd.read_csv(path)) == 2


def test_derivation_file(tmp_path):
    derivation = gen_ind_n(2, [AgentAtom("q"), AgentAtom("r")], Atom("p"))
    path = ExportEngine(report_dir=str(tmp_path)).export_derivation(derivation, str(tmp_path / "ind.prf"))
    assert load_derivation(path) == derivation
