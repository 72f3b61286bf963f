import json

import pytest

from amgann.dataset.corpus import read_corpus
from amgann.main import cli_main

TINY_ARCH = "4 1 0.1 - - - 8 8 1"


def _json_output(capsys):
    return json.loads(capsys.readouterr().out)


def test_help_lists_subcommands(capsys):
    assert cli_main(["--help"]) == 0
    out = capsys.readouterr().out
    for command in ("generate", "split", "train", "predict", "select-theta", "solve",
                    "benchmark", "analyze", "export-figures"):
        assert command in out


@pytest.mark.parametrize("argv", [
    [],
    ["frobnicate"],
    ["solve", "--pattern", "a", "--level", "3", "--epsilon", "0", "--bogus"],
    ["solve", "--pattern", "e", "--level", "3", "--epsilon", "0"],
    ["generate", "ds3", "--out", "x.amgs"],
])
def test_usage_errors(argv):
    assert cli_main(argv) == 2


def test_solve_with_missing_model(tmp_path, caplog):
    code = cli_main(["solve", "--model", str(tmp_path / "none.amgn"),
                     "--pattern", "a", "--level", "3", "--epsilon", "0"])
    assert code == 1
    assert "none.amgn" in caplog.text


def test_solve_needs_model_or_theta():
    assert cli_main(["solve", "--pattern", "a", "--level", "3", "--epsilon", "0"]) == 1


def test_invalid_problem_is_a_domain_error():
    assert cli_main(["solve", "--theta", "0.3", "--pattern", "c", "--cells", "2", "--epsilon", "1"]) == 1


def test_solve_with_fixed_theta(capsys):
    assert cli_main(["solve", "--theta", "0.25", "--pattern", "b", "--level", "4", "--epsilon", "2.0",
                     "--history"]) == 0
    result = _json_output(capsys)
    assert result["selection"]["theta"] == 0.25
    assert result["report"]["converged"]
    assert len(result["report"]["residuals"]) == result["report"]["iterations"] + 1
    assert result["l2_error"] < 0.1


def test_benchmark_writes_csv(tmp_path):
    out = tmp_path / "bench.csv"
    assert cli_main(["benchmark", "--pattern", "a", "--level", "3", "--epsilon", "1.2",
                     "--theta-grid", "0.2,0.5", "--repetitions", "2", "--out", str(out)]) == 0
    assert out.read_text().splitlines()[0].startswith("theta,")


def test_end_to_end(tmp_path, capsys):
    corpus = tmp_path / "ds1.amgs"
    model = tmp_path / "model.amgn"
    assert cli_main(["generate", "ds1", "--out", str(corpus), "--levels", "3", "--m", "8",
                     "--theta-grid", "0.12:0.72:5", "--no-timing"]) == 0
    samples = read_corpus(corpus)
    assert len(samples) == 4 * 12 * 5

    assert cli_main(["split", "--corpus", str(corpus), "--out", str(tmp_path / "split"), "--seed", "1"]) == 0
    assert sorted(p.name for p in (tmp_path / "split").iterdir()) == ["test.amgs", "train.amgs", "val.amgs"]

    capsys.readouterr()
    assert cli_main(["train", "--split-dir", str(tmp_path / "split"), "--out", str(model),
                     "--arch", TINY_ARCH, "--epochs", "20", "--seed", "1"]) == 0
    scores = _json_output(capsys)
    assert set(scores["test"]) == {"all", "ds1"}
    assert model.exists() and model.with_suffix(".json").exists()

    problem = ["--pattern", "d", "--level", "4", "--epsilon", "2.0"]
    assert cli_main(["predict", "--model", str(model), "--theta", "0.3", *problem]) == 0
    assert "rho_predicted" in _json_output(capsys)
    assert cli_main(["select-theta", "--model", str(model), "--theta-grid", "0.12:0.72:5", *problem]) == 0
    assert _json_output(capsys)["theta"] in [0.12, 0.27, 0.42, 0.57, 0.72]
    assert cli_main(["solve", "--model", str(model), *problem]) == 0
    assert _json_output(capsys)["report"]["converged"]

    assert cli_main(["predict", "--model", str(model), "--theta", "0.3", "--mode", "mean-scaled", *problem]) == 1

    assert cli_main(["analyze", "--corpus", str(corpus), "--out", str(tmp_path / "ols.json"),
                     "--csv", str(tmp_path / "records.csv")]) == 0
    assert json.loads((tmp_path / "ols.json").read_text())["samples"] == len(samples)
    assert cli_main(["export-figures", "--corpus", str(corpus), "--model", str(model),
                     "--out", str(tmp_path / "figures")]) == 0
    assert (tmp_path / "figures" / "predicted_vs_true.csv").exists()


def test_generate_is_idempotent(tmp_path):
    argv = ["generate", "ds2", "--levels", "3", "--m", "6", "--theta-grid", "0.3", "--no-timing"]
    assert cli_main([*argv, "--out", str(tmp_path / "a.amgs")]) == 0
    assert cli_main([*argv, "--out", str(tmp_path / "b.amgs")]) == 0
    assert (tmp_path / "a.amgs").read_bytes() == (tmp_path / "b.amgs").read_bytes()
