from __future__ import annotations

import subprocess
import sys

import pytest

from constcost.cli import RunConfig, main
from constcost.matrix import dumps, loads
from constcost.problems import gen_ehd, gen_ehd2_gadget, gen_gt


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def files(tmp_path):
    paths = {}
    for name, M in {"ehd31": gen_ehd(3, 1), "gt4": gen_gt(4), "gadget": gen_ehd2_gadget()}.items():
        paths[name] = tmp_path / f"{name}.txt"
        paths[name].write_text(dumps(M))
    paths["Z"] = tmp_path / "Z.txt"
    paths["Z"].write_text("0000\n0011\n0101\n")
    paths["coloring"] = tmp_path / "pentagon.txt"
    lines = [f"{i} v" for i in range(5)]
    lines += [f"{i} {j} {'c' if (j - i) % 5 in (1, 4) else 'd'}" for i in range(5) for j in range(i + 1, 5)]
    paths["coloring"].write_text("\n".join(lines) + "\n")
    return paths


def test_run_config_rejects_bad_budget():
    assert RunConfig("gen").seed == 0
    with pytest.raises(ValueError):
        RunConfig("gen", budget=0)


def test_gen_ehd(capsys):
    code, out, _ = run(capsys, "gen", "ehd", "--n", "3", "--k", "1")
    assert code == 0
    M = loads(out)
    assert M.shape == (8, 8) and M == gen_ehd(3, 1)


def test_gen_to_file(capsys, tmp_path):
    target = tmp_path / "gt.txt"
    code, out, _ = run(capsys, "gen", "gt", "--t", "3", "--out", str(target))
    assert code == 0 and out == ""
    assert loads(target.read_text()) == gen_gt(3)


def test_gen_domain_error(capsys):
    code, _, err = run(capsys, "gen", "ehd", "--n", "2", "--k", "5")
    assert code == 1 and "error" in err


def test_threshold_distance_run(capsys, files):
    code, out, _ = run(capsys, "run", "threshold-distance", "--sets", str(files["Z"]), "--x", "0011", "--y", "0101", "--k", "2")
    assert code == 0 and out.startswith("2, queries=")
    code, out, _ = run(capsys, "run", "threshold-distance", "--sets", str(files["Z"]), "--x", "0011", "--y", "0101", "--k", "1")
    assert out.startswith("⊥, queries=")


def test_run_transcript_and_other_protocols(capsys, files):
    code, out, _ = run(capsys, "run", "gt", "--N", "8", "--i", "3", "--j", "5", "--transcript")
    assert code == 0 and out.startswith("1, queries=") and "prefix" in out
    code, out, _ = run(capsys, "run", "naive-thd", "--x", "00000001", "--y", "00000000", "--k", "1")
    assert out.startswith("1, queries=")
    code, out, _ = run(capsys, "run", "bounded-diameter", "--sets", str(files["Z"]), "--x", "0011", "--y", "0101", "--k", "2")
    assert out.startswith("2, queries=")


def test_run_gadget_labels(capsys, files):
    code, out, _ = run(capsys, "run", "threshold-distance", "--sets", str(files["gadget"]), "--x", "0011000", "--y", "1010000", "--k", "2")
    assert code == 0 and out.startswith("2, queries=")


def test_run_usage_errors(capsys, files):
    with pytest.raises(SystemExit) as exc:
        main(["run", "gt", "--N", "8"])
    assert exc.value.code == 2
    code, _, err = run(capsys, "run", "threshold-distance", "--sets", str(files["Z"]), "--x", "1111", "--y", "0101")
    assert code == 1


def test_unknown_subcommand():
    with pytest.raises(SystemExit):
        main(["frobnicate"])


def test_analyze(capsys, files):
    code, out, _ = run(capsys, "analyze", str(files["gt4"]))
    assert code == 0 and "max_gt 4" in out
    code, out, _ = run(capsys, "analyze", str(files["ehd31"]), "--pattern", str(files["gt4"]))
    assert "pattern NONE" in out


def test_analyze_budget_exit(capsys, files):
    code, _, err = run(capsys, "analyze", str(files["ehd31"]), "--budget", "2")
    assert code == 2 and "budget" in err


def test_domino_commands(capsys, files):
    code, out, _ = run(capsys, "domino", "tally", "0110000", "0101001")
    assert out.strip() == "00=3 01=2 10=1 11=1"
    code, out, _ = run(capsys, "domino", "type", "0110000", "0101001", "--delta", "01,10")
    assert out.startswith("signature 10 01 01")
    code, out, _ = run(capsys, "domino", "shuffle", str(files["ehd31"]))
    assert code == 0 and out.strip() == "INVARIANT"


def test_check_commands(capsys, files, tmp_path):
    assert run(capsys, "check", "two-tally", str(files["gadget"]), "--k", "2")[0] == 0
    assert run(capsys, "check", "blocky", str(files["ehd31"]))[0] == 1
    assert run(capsys, "check", "stable", str(files["gt4"]), "--t", "5")[0] == 0
    assert run(capsys, "check", "invariance", str(files["ehd31"]))[0] == 0
    numeric = tmp_path / "numeric.txt"
    numeric.write_text(dumps(type(gen_gt(4))(gen_gt(4).entries, ("00", "01", "10", "11"), ("00", "01", "10", "11"))))
    code, out, _ = run(capsys, "check", "invariance", str(numeric))
    assert code == 1 and out.startswith("VIOLATION")


def test_sweep_csv(capsys):
    argv = ["sweep", "--sizes", "16", "--k", "1,2", "--trials", "10", "--seed", "3"]
    code, out, _ = run(capsys, *argv)
    lines = out.strip().splitlines()
    assert code == 0 and lines[0] == "N,d,k,max_queries,mean_queries,seed"
    assert len(lines) == 3
    assert run(capsys, *argv)[1] == out


def test_ramsey_find(capsys, files):
    code, out, _ = run(capsys, "ramsey", "find", str(files["coloring"]), "--sigma", "3")
    assert code == 0 and out.strip() == "NONE"
    code, out, _ = run(capsys, "ramsey", "find", str(files["coloring"]), "--sigma", "2")
    assert len(out.split()) == 2


def test_reduce_search_and_verify(capsys, files, tmp_path):
    eq = tmp_path / "eq.txt"
    eq.write_text(dumps(gen_ehd(2, 0)))
    code, out, _ = run(capsys, "reduce", "search", str(eq))
    assert code == 0 and out.startswith("witness 1\n01\n")
    wfile = tmp_path / "w.txt"
    wfile.write_text(out)
    assert run(capsys, "reduce", "verify", str(eq), str(wfile))[0] == 0
    wfile.write_text(out.replace("witness 1\n01\n", "witness 1\n10\n"))
    code, out, _ = run(capsys, "reduce", "verify", str(eq), str(wfile))
    assert code == 1 and out.strip() == "INVALID"
    code, out, _ = run(capsys, "reduce", "search", str(files["ehd31"]))
    assert out.strip() == "NONE"


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "constcost.cli", "gen", "eq", "--n", "1"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.startswith("2 2")
