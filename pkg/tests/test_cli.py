import json
import pathlib

import pytest

from dtlstar.cli import main


@pytest.fixture
def chain_model_file(tmp_path):
    data = {
        "worlds": ["a", "b"],
        "order": [["b", "a"]],
        "f": {"a": "a", "b": "b"},
        "val": {"p": ["b"]},
    }
    path = tmp_path / "model.json"
    path.write_text(json.dumps(data))
    return str(path)


@pytest.fixture
def state_file(tmp_path):
    data = {
        "worlds": ["a", "b"],
        "order": [["b", "a"]],
        "root": "a",
        "types": {"a": ["p"], "b": ["~p"]},
    }
    path = tmp_path / "state.json"
    path.write_text(json.dumps(data))
    return str(path)


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


class TestCommands:
    def test_parse(self, capsys):
        code, out, _ = run(capsys, "parse", "p -> q")
        assert code == 0
        assert json.loads(out) == {"ok": True, "formula": "~(p & ~q)"}

    def test_parse_error_exit_2(self, capsys):
        code, out, err = run(capsys, "parse", "p & & q")
        assert code == 2 and "error" in err

    def test_eval(self, capsys, chain_model_file):
        code, out, _ = run(capsys, "eval", "--model", chain_model_file,
                           "--formula", "<>p")
        assert code == 0
        assert json.loads(out)["worlds"] == ["a", "b"]

    def test_check_model_ok(self, capsys, chain_model_file):
        code, out, _ = run(capsys, "check-model", chain_model_file)
        assert code == 0 and json.loads(out)["ok"]

    def test_check_model_invalid_exit_1(self, capsys, tmp_path):
        bad = {"worlds": ["a", "b"], "order": [["b", "a"]],
               "f": {"a": "b", "b": "a"}, "val": {}}
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(bad))
        code, out, _ = run(capsys, "check-model", str(path))
        assert code == 1 and not json.loads(out)["ok"]

    def test_sim_state_into_model(self, capsys, state_file, chain_model_file):
        code, out, _ = run(capsys, "sim", "--state", state_file,
                           "--model", chain_model_file, "--point", "a")
        assert code == 1  # root type has p but the point satisfies ~p

    def test_simformula(self, capsys, state_file):
        code, out, _ = run(capsys, "simformula", state_file)
        assert code == 0
        text = json.loads(out)["formula"]
        from dtlstar.syntax import parse

        parse(text)

    def test_quasimodel_check(self, capsys, tmp_path):
        data = {
            "worlds": ["a"],
            "order": [],
            "types": {"a": ["p"]},
            "step": [["a", "a"]],
        }
        path = tmp_path / "qm.json"
        path.write_text(json.dumps(data))
        code, out, _ = run(capsys, "quasimodel-check", str(path))
        assert code == 0 and json.loads(out)["ok"]

    def test_enumerate_count(self, capsys):
        code, out, _ = run(capsys, "enumerate", "--max-worlds", "1",
                           "--vars", "p", "--count-only")
        assert code == 0 and json.loads(out)["count"] == 2

    def test_satisfy_roundtrip(self, capsys):
        code, out, _ = run(capsys, "satisfy", "F p & ~p")
        assert code == 0
        report = json.loads(out)
        assert report["verdict"] == "satisfiable"
        assert report["witness_model"] is not None

    def test_satisfy_no_witness_exit_1(self, capsys):
        code, out, _ = run(capsys, "satisfy", "p & ~p")
        assert code == 1
        assert json.loads(out)["verdict"] == "no-witness-found"

    def test_check_proof(self, capsys):
        corpus = sorted((pathlib.Path(__file__).parent / "data" / "proofs").glob("*.json"))
        code, out, _ = run(capsys, "check-proof", str(corpus[0]))
        assert code == 0 and json.loads(out)["ok"]

    def test_soundness_test(self, capsys):
        code, out, _ = run(capsys, "soundness-test", "--trials", "50", "--seed", "1")
        assert code == 0
        report = json.loads(out)
        assert report["ok"] and report["trials"] == 50

    def test_deterministic_output(self, capsys):
        _, out1, _ = run(capsys, "satisfy", "F p & ~p", "--seed", "5")
        _, out2, _ = run(capsys, "satisfy", "F p & ~p", "--seed", "5")
        assert out1 == out2

    def test_missing_file_exit_2(self, capsys):
        code, _, err = run(capsys, "eval", "--model", "/nonexistent.json",
                           "--formula", "p")
        assert code == 2 and "error" in err
