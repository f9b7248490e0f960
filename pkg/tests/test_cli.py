import json
import subprocess
import sys

import pytest

from mvperf.cli import EXIT_DATA, EXIT_DIMS, EXIT_MEASURE, EXIT_USAGE, run


@pytest.fixture
def workdir(tmp_path):
    assert run(["gen", "--out", str(tmp_path / "d"), "--seed", "0"]) == 0
    return tmp_path


def test_train_eval_separable(workdir, capsys):
    data = str(workdir / "d" / "data.json")
    model = str(workdir / "m.json")
    code = run(["train", "--data", data, "--measure", "err", "--c1", "10", "--c2", "1",
                "--max-iter", "50", "--eps", "1e-4", "--out", model])
    assert code == 0
    assert (workdir / "m.json.log.csv").read_text().startswith("t,xi,violation,primal\n")
    capsys.readouterr()
    assert run(["eval", "--data", data, "--model", model]) == 0
    out = capsys.readouterr().out
    assert "err loss 0.0" in out
    assert run(["eval", "--data", data, "--model", model, "--json", "--measure", "f1"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["loss"] == 0.0 and rep["tp"] + rep["fn"] == 30


def test_train_is_reproducible(workdir):
    data = str(workdir / "d" / "data.json")
    for name in ("a", "b"):
        assert run(["train", "--data", data, "--measure", "f1", "--max-iter", "8",
                    "--out", str(workdir / f"{name}.json"), "--log", str(workdir / f"{name}.csv")]) == 0
    assert (workdir / "a.json").read_bytes() == (workdir / "b.json").read_bytes()
    assert (workdir / "a.csv").read_bytes() == (workdir / "b.csv").read_bytes()


def test_predict_writes_labels(workdir):
    data = str(workdir / "d" / "data.json")
    model = str(workdir / "m.json")
    run(["train", "--data", data, "--max-iter", "5", "--out", model])
    assert run(["predict", "--data", data, "--model", model, "--out", str(workdir / "p.txt")]) == 0
    lines = (workdir / "p.txt").read_text().splitlines()
    assert len(lines) == 60 and set(lines) <= {"+1", "-1"}


def test_dimension_mismatch_exit(workdir, capsys):
    run(["gen", "--out", str(workdir / "small"), "--dims", "3,3", "-n", "10"])
    model = str(workdir / "m.json")
    run(["train", "--data", str(workdir / "d" / "data.json"), "--max-iter", "2", "--out", model])
    code = run(["predict", "--data", str(workdir / "small" / "data.json"), "--model", model,
                "--out", str(workdir / "p.txt")])
    assert code == EXIT_DIMS
    assert "dims" in capsys.readouterr().err


def test_usage_errors(capsys):
    assert run([]) == EXIT_USAGE
    assert run(["train", "--bogus"]) == EXIT_USAGE
    assert run(["train", "--data", "x", "--out", "y", "--measure", "auc"]) == EXIT_USAGE
    assert run(["verify", "--suite", "nope"]) == EXIT_USAGE


def test_bad_config_is_usage(workdir):
    code = run(["train", "--data", str(workdir / "d" / "data.json"), "--c1", "0", "--out", str(workdir / "m")])
    assert code == EXIT_USAGE


def test_file_errors(tmp_path):
    assert run(["train", "--data", str(tmp_path / "missing.json"), "--out", str(tmp_path / "m")]) == EXIT_DATA
    (tmp_path / "junk.json").write_text("{}")
    assert run(["eval", "--data", str(tmp_path / "junk.json"), "--model", "x"]) == EXIT_DATA


def test_measure_error_exit(workdir):
    code = run(["train", "--data", str(workdir / "d" / "data.json"), "--measure", "prec@500",
                "--out", str(workdir / "m")])
    assert code == EXIT_MEASURE


def test_verify_constraint_search(capsys):
    assert run(["verify", "--suite", "constraint-search"]) == 0
    assert "pass 200/200" in capsys.readouterr().out


def test_help_documents_exit_codes(capsys):
    assert run(["--help"]) == 0
    out = capsys.readouterr().out
    for code in range(7):
        assert f"  {code}  " in out


def test_module_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "mvperf", "gen", "--out", str(tmp_path), "-n", "8"],
                         capture_output=True, text=True, env={"MVPERF_THREADS": "1", "PATH": ""})
    assert res.returncode == 0, res.stderr
    assert (tmp_path / "data.json").exists()
