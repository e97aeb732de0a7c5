import csv
import json
import math
import shutil
import subprocess

import pytest

from crownwave import fixtures as fx
from crownwave.cli import dispatch, format_complex, parse_complex


def run(capsys, *argv):
    code = dispatch(list(argv))
    out = capsys.readouterr()
    return code, (json.loads(out.out) if out.out.strip() else None), out.err


def value(d):
    return complex(d["re"], d["im"])


def test_complex_parsing():
    assert parse_complex("0.3i") == 0.3j
    assert parse_complex("0.5") == 0.5
    assert parse_complex("1-2j") == 1 - 2j
    assert parse_complex(format_complex(0.25 - 1.5j)) == 0.25 - 1.5j


def test_hyp_eval_example(capsys):
    code, rep, _ = run(capsys, "hyp", "eval", "--n", "3", "--lambda", "0.5", "--z", "0.5")
    assert code == 0
    assert rep["command"] == "hyp eval"
    assert set(rep) == {"command", "config", "results", "checks", "pass"}
    res = rep["results"][0]
    assert value(res["value"]) == pytest.approx(math.sqrt(2), rel=1e-15)
    assert res["method"] == "series"


def test_config_round_trip(capsys):
    argv = ["hyp", "boundary", "--n", "4", "--lambda", "1.2i", "--x", "1.5", "--side", "Plus"]
    _, first, _ = run(capsys, *argv)
    cfg = first["config"]
    again = ["hyp", "boundary"]
    for k, v in cfg.items():
        again += [f"--{k}", str(v)]
    _, second, _ = run(capsys, *again)
    assert second == first


def test_reports_are_deterministic(capsys, tmp_path):
    argv = ["kernel", "gram", "--n", "3", "--lambda", "0.5", "--count", "12", "--seed", "4"]
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert dispatch(argv + ["--out", str(a)]) == 0
    assert dispatch(argv + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert dispatch(argv + ["--out", str(a), "--timing"]) == 0
    assert "wall_time_s" in json.loads(a.read_text())


def test_jump_and_boundary_agree(capsys):
    _, j, _ = run(capsys, "hyp", "jump", "--n", "3", "--lambda", "0.4", "--x", "1.5")
    _, m, _ = run(capsys, "hyp", "boundary", "--n", "3", "--lambda", "0.4", "--x", "1.5", "--side", "Minus")
    _, p, _ = run(capsys, "hyp", "boundary", "--n", "3", "--lambda", "0.4", "--x", "1.5", "--side", "Plus")
    diff = value(m["results"][0]["value"]) - value(p["results"][0]["value"])
    assert value(j["results"][0]["jump"]) == pytest.approx(diff, rel=1e-12)


def test_gram_csv_schema(capsys, tmp_path):
    path = tmp_path / "gram.csv"
    code, rep, _ = run(capsys, "kernel", "gram", "--n", "2", "--lambda", "0.3i", "--count", "8", "--csv", str(path))
    assert code == 0
    rows = list(csv.reader(path.open()))
    assert rows[0] == ["index", "eigenvalue"]
    assert len(rows) == 9


def test_wf_flow_example(capsys, tmp_path):
    path = tmp_path / "flow.csv"
    code, rep, _ = run(capsys, "wf", "flow", "--xi", "1,-1", "--T", "2", "--csv", str(path))
    assert code == 0 and rep["pass"]
    rows = list(csv.DictReader(path.open()))
    assert list(rows[0]) == ["t", "v_0", "v_1", "xi_0", "xi_1"]
    for r in rows:
        t = float(r["t"])
        assert float(r["xi_0"]) == 1.0 and float(r["xi_1"]) == -1.0
        assert float(r["v_0"]) == pytest.approx(2 * t) and float(r["v_1"]) == pytest.approx(2 * t)


def test_wf_predict_csv_schema(capsys, tmp_path):
    path = tmp_path / "spec.csv"
    code, _, _ = run(capsys, "wf", "predict", "--n", "3", "--count", "5", "--csv", str(path))
    assert code == 0
    rows = list(csv.reader(path.open()))
    assert rows[0] == ["base_0", "base_1", "base_2", "base_3", "xi_0", "xi_1", "xi_2", "xi_3", "kind"]
    assert len(rows) == 6 and all(r[-1] == "PsiSpec" for r in rows[1:])


def test_wf_probe_table(capsys, tmp_path):
    path = tmp_path / "probe.csv"
    code, rep, _ = run(capsys, "wf", "probe", "--n", "3", "--lambda", "0.5", "--v", "0.5,0.5,0",
                       "--taus", "64", "128", "256", "--csv", str(path))
    assert code == 0, rep
    assert [r["singular"] for r in rep["results"]] == [True, False]
    header = next(csv.reader(path.open()))
    assert header[:4] == ["direction", "xi", "tau", "magnitude"]


def test_dist_commands(capsys):
    code, rep, _ = run(capsys, "dist", "pair", "--dist", "i0:-0.5:plus")
    assert code == 0 and rep["pass"]
    code, rep, _ = run(capsys, "dist", "decompose", "--lambda", "-1", "--side", "Plus")
    assert code == 0
    code, rep, _ = run(capsys, "dist", "probe", "--dist", "heaviside")
    assert code == 0


def test_kernel_commands(capsys):
    code, rep, _ = run(capsys, "kernel", "eval", "--n", "3", "--lambda", "0.5", "--y", "0,0.6,0,0.8")
    assert code == 0
    code, rep, _ = run(capsys, "kernel", "recursion", "--n", "3", "--lambda", "0.5", "--lambda-p", "0")
    assert code == 0 and rep["pass"]


@pytest.mark.parametrize("argv", [
    ["hyp", "eval", "--n", "3", "--lambda", "-0.4", "--z", "0.5"],
    ["hyp", "eval", "--n", "3", "--lambda", "0.5", "--z", "1.5"],
    ["kernel", "eval", "--n", "2", "--lambda", "0.3i", "--y", "0,0.5,0.5"],
    ["nonsense"],
    ["hyp", "eval", "--n", "3"],
    ["verify", "all", "--n", "3"],
])
def test_usage_errors_exit_2(argv, capsys):
    assert dispatch(argv) == 2


def test_io_errors_exit_3(capsys, tmp_path, monkeypatch):
    bad = tmp_path / "missing" / "out.json"
    assert dispatch(["hyp", "eval", "--n", "3", "--lambda", "0.5", "--z", "0.5", "--out", str(bad)]) == 3
    monkeypatch.setenv(fx.ENV_VAR, str(tmp_path / "nowhere"))
    assert dispatch(["verify", "all", "--only", "1"]) == 3


def test_failed_check_exit_1(capsys):
    code, rep, _ = run(capsys, "verify", "all", "--only", "4")
    assert code == 1
    assert rep["pass"] is False


@pytest.mark.slow
def test_verify_single_set_example(capsys):
    code, rep, err = run(capsys, "verify", "all", "--n", "3", "--lambda", "0.5")
    assert code == 0, err
    assert rep["pass"]
    assert err.count("criterion") == 12


def test_console_script():
    exe = shutil.which("crownwave")
    assert exe, "console script not installed"
    out = subprocess.run([exe, "hyp", "eval", "--n", "3", "--lambda", "0.5", "--z", "0.5"],
                         capture_output=True, text=True, check=True)
    assert json.loads(out.stdout)["pass"]
