import csv
import functools
import io
import json
import math
import subprocess
import sys

import pytest

from grothendieck import __version__, cli, sdp
from grothendieck.cutpoly import LinearInequality, circuit_inequality
from grothendieck.graph import Circuit, cycle_graph


def run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(argv, capsys):
    code, out, err = run(argv, capsys)
    assert code == 0, err
    return json.loads(out)


# ---------------------------------------------------------------------------
# Worked examples


def test_gap_on_the_five_cycle(capsys):
    rep = run_json(["gap", "--graph", "Cn:5", "--weights", "minus-ones"], capsys)
    res = rep["result"]
    assert res["ip"] == 3
    assert res["sdp"] == pytest.approx(5 * math.cos(math.pi / 5), abs=1e-7)
    assert res["ratio"] == pytest.approx(5 / 3 * math.cos(math.pi / 5), abs=1e-7)
    assert round(res["sdp"], 7) == 4.045085
    assert round(res["ratio"], 7) == 1.3483617


def test_weights_default_to_minus_ones(capsys):
    a = run_json(["gap", "--graph", "Cn:5"], capsys)
    b = run_json(["gap", "--graph", "Cn:5", "--weights", "minus-ones"], capsys)
    assert a == b


def test_cliqueweb_reduced(capsys):
    res = run_json(["cliqueweb", "--q", "2", "--r", "1", "--mode", "reduced"], capsys)["result"]
    c = math.cos(math.pi / 5)
    assert res["value"] == pytest.approx(-1 + 5 * (c + 1 / (c + 1)), abs=1e-7)
    assert round(res["value"], 7) == 5.809017
    assert res["ratio"] == pytest.approx(res["value"] / 4, abs=1e-9)
    assert round(res["ratio"], 7) == 1.4522542


def test_verify_circuits_suite(capsys):
    rep = run_json(["verify", "--suite", "circuits", "--nmax", "11"], capsys)
    assert rep["result"]["passed"]
    assert rep["result"]["checks"] and all(c["passed"] for c in rep["result"]["checks"])


@pytest.mark.parametrize("suite", ["k5free", "hypermetric", "membership", "lemmas", "cliqueweb"])
def test_other_suites_pass(suite, capsys):
    assert run_json(["verify", "--suite", suite], capsys)["result"]["passed"]


def test_ip_and_sdp_commands(capsys):
    assert run_json(["ip", "--graph", "Kn:3"], capsys)["result"]["ip"] == 1
    res = run_json(["sdp", "--graph", "Kn:3"], capsys)["result"]
    assert res["value"] == pytest.approx(1.5, abs=1e-8)
    assert res["dual_bound"] >= res["value"] - 1e-12


def test_gw_defaults_to_unit_weights(capsys):
    res = run_json(["gw", "--graph", "Cn:5"], capsys)["result"]
    assert res["maxcut"] == 4
    assert res["sdp_gw"] >= res["maxcut"] - 1e-9
    assert res["sdp_gw"] <= 1.138 * res["maxcut"]


def test_kappa_of_a_grid(capsys):
    res = run_json(["kappa", "--graph", "Grid:3,3"], capsys)["result"]
    assert res["girth"] == 4
    assert res["kappa"] == pytest.approx(2 * math.cos(math.pi / 4), abs=1e-12)
    assert res["circuit_lower_bound"] <= res["kappa"] + 1e-6


def test_hypermetric(capsys):
    res = run_json(["hypermetric", "--b", "1,1,-1"], capsys)["result"]
    assert res["ratio"] == pytest.approx(1.5, abs=1e-6)


@pytest.mark.parametrize(
    "test,x,inside",
    [
        ("met", "-0.6,-0.6,-0.6,-0.6,-0.6", True),
        ("met", "-0.9,-0.9,-0.9,-0.9,-0.9", False),
        ("met01", "0.8,0.8,0.8,0.8,0.8", True),
        ("met01", "0.9,0.9,0.9,0.9,0.9", False),
        ("cos", "-0.8,-0.8,-0.8,-0.8,-0.8", True),
        ("cos", "-0.81,-0.81,-0.81,-0.81,-0.81", False),
    ],
)
def test_membership_met(test, x, inside, capsys):
    res = run_json(["membership", "--graph", "Cn:5", "--test", test, f"--x={x}"], capsys)["result"]
    assert res["inside"] is inside
    if test == "met":
        assert ("violated" in res) is (not inside)


def test_membership_constant_and_dilation(capsys):
    edge = -math.cos(math.pi / 5)
    res = run_json(["membership", "--graph", "Cn:5", "--test", "constant", f"--x={edge + 1e-4}"], capsys)
    assert res["result"]["inside"] is True
    res = run_json(["membership", "--graph", "Cn:5", "--test", "constant", f"--x={edge - 1e-3}"], capsys)
    assert res["result"]["inside"] is False
    res = run_json(["membership", "--graph", "Kn:3", "--test", "dilation", "--x=-0.5,-0.5,-0.5", "--k", "1.6"], capsys)
    assert res["result"]["inside"] is True


# ---------------------------------------------------------------------------
# Report format


def test_reproducibility_header(capsys):
    rep = run_json(["gap", "--graph", "Cn:7", "--seed", "3", "--tol", "1e-9"], capsys)
    assert rep["version"] == __version__
    assert rep["command"] == "gap"
    assert rep["seed"] == 3 and rep["tol"] == 1e-9
    assert set(rep["guards"]) == {"guard_n", "cycle_budget", "assume_k5_free"}
    assert rep["converged"] is True


@pytest.mark.parametrize(
    "argv",
    [
        ["gap", "--graph", "Cn:7"],
        ["sdp", "--graph", "Kn:6", "--weights", "ones", "--seed", "4"],
        ["cliqueweb", "--q", "2-3", "--r", "0-1", "--mode", "full"],
    ],
)
def test_reports_are_byte_identical(argv, tmp_path):
    texts = []
    for k in range(2):
        out = tmp_path / f"r{k}.json"
        assert cli.main([*argv, "--out", str(out)]) == 0
        texts.append(out.read_bytes())
    assert texts[0] == texts[1]


def test_reports_are_identical_across_processes(tmp_path):
    texts = []
    for k in range(2):
        out = tmp_path / f"p{k}.json"
        cmd = [sys.executable, "-m", "grothendieck", "gap", "--graph", "CW:q=2,r=1", "--out", str(out)]
        subprocess.run(cmd, check=True)
        texts.append(out.read_bytes())
    assert texts[0] == texts[1]


def test_cliqueweb_sweep_csv(capsys):
    code, out, _ = run(["cliqueweb", "--q", "2-4", "--r", "0-2", "--format", "csv"], capsys)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert list(rows[0]) == ["q", "r", "ip", "sdp", "dual", "ratio", "bound2", "bound3"]
    assert len(rows) == 9
    for row in rows:
        q, r = int(row["q"]), int(row["r"])
        # exactly one regime bound applies to each row
        assert (row["bound2"] != "") == (q >= 2 * r + 1)
        assert (row["bound3"] != "") == (q <= 2 * r)
        bound = float(row["bound2"] or row["bound3"])
        assert float(row["ratio"]) <= bound + 1e-6
        assert float(row["dual"]) >= float(row["sdp"]) - 1e-9


def test_verify_csv_lists_checks(capsys):
    code, out, _ = run(["verify", "--suite", "circuits", "--nmax", "6", "--format", "csv"], capsys)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert rows and all(r["passed"] == "True" for r in rows)


# ---------------------------------------------------------------------------
# Weights and graph files


def test_inequality_file_as_weights(tmp_path, capsys):
    g = cycle_graph(5)
    path = tmp_path / "ineq.json"
    path.write_text(json.dumps(circuit_inequality(Circuit((1, 2, 3, 4, 5), g), g.edges).to_dict()))
    res = run_json(["gap", "--weights", str(path)], capsys)["result"]
    assert res["ip"] == 3
    assert res["ratio"] == pytest.approx(5 / 3 * math.cos(math.pi / 5), abs=1e-7)


def test_weight_list_file_and_graph_file(tmp_path, capsys):
    g = cycle_graph(4)
    gpath, wpath = tmp_path / "g.json", tmp_path / "w.json"
    gpath.write_text(json.dumps(g.to_dict()))
    wpath.write_text(json.dumps({"weights": [-1, 1, 1, 1]}))
    res = run_json(["gap", "--graph", str(gpath), "--weights", str(wpath)], capsys)["result"]
    assert res["ip"] == 2
    assert res["sdp"] == pytest.approx(4 * math.cos(math.pi / 4), abs=1e-7)


def test_explicit_weight_list(capsys):
    a = run_json(["gap", "--graph", "Cn:4", "--weights=-1,1,1,1"], capsys)["result"]
    b = run_json(["gap", "--graph", "Cn:4", "--weights", "circuit"], capsys)["result"]
    assert a["ip"] == b["ip"] == 2


def test_inequality_graph_must_match(tmp_path, capsys):
    path = tmp_path / "ineq.json"
    path.write_text(json.dumps(LinearInequality(cycle_graph(5), [-1] * 5, 3).to_dict()))
    code, _, err = run(["gap", "--graph", "Cn:6", "--weights", str(path)], capsys)
    assert code == 2 and "differs" in err


# ---------------------------------------------------------------------------
# Exit codes


def test_malformed_json_reports_position(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text('{"n": 3,\n "edges": [[1, 2],, [2, 3]]}')
    code, out, err = run(["gap", "--graph", str(path)], capsys)
    assert code == 2
    assert out == ""
    assert "line 2" in err and "column" in err


@pytest.mark.parametrize(
    "argv",
    [
        ["gap", "--graph", "Foo:3"],
        ["gap", "--graph", "Cn:5", "--weights", "1,2"],
        ["gap", "--graph", "Cn:5", "--weights", "1,x,3,4,5"],
        ["gap", "--graph", "Cn:5", "--tol", "0"],
        ["gap", "--graph", "Cn:4", "--weights", "0,0,0,0"],
        ["gap", "--graph", "missing.json"],
        ["cliqueweb", "--q", "1", "--r", "1"],
        ["hypermetric"],
        ["membership", "--graph", "Cn:5"],
        ["kappa", "--graph", "Kn:5"],
    ],
)
def test_rejected_input_exits_2(argv, capsys):
    assert run(argv, capsys)[0] == 2


def test_guard_exits_3_and_names_the_flag(capsys):
    code, out, err = run(["ip", "--graph", "Kn:30"], capsys)
    assert code == 3
    assert out == ""
    assert "ip_n" in err or "cut_n" in err
    assert "--guard-n" in err


def test_minor_guard_and_assumption(capsys):
    code, _, err = run(["kappa", "--graph", "Grid:5,5"], capsys)
    assert code == 3 and "--assume-k5-free" in err
    res = run_json(["kappa", "--graph", "Grid:5,5", "--assume-k5-free"], capsys)["result"]
    assert res["kappa"] == pytest.approx(2 * math.cos(math.pi / 4), abs=1e-12)


def test_cycle_budget_guard(capsys):
    x = ",".join(["0"] * 28)
    code, _, err = run(["membership", "--graph", "Kn:8", "--x", x, "--cycle-budget", "5"], capsys)
    assert code == 3 and "--cycle-budget" in err


def test_unconverged_solve_exits_4_and_still_writes(monkeypatch, capsys):
    monkeypatch.setattr(cli, "solve_elliptope_max", functools.partial(sdp.solve_elliptope_max, max_iters=1))
    code, out, err = run(["sdp", "--graph", "Cn:5"], capsys)
    assert code == 4
    rep = json.loads(out)
    assert rep["converged"] is False
    assert rep["result"]["dual_bound"] >= rep["result"]["value"]
    assert "convergence" in err


def test_failed_verification_serializes_first_counterexample(monkeypatch, capsys):
    from grothendieck import verify

    def broken(**_):
        return [verify.Check("always-off", False, 1.0, 0.0, 1e-9)]

    monkeypatch.setitem(verify.SUITES, "circuits", broken)
    code, out, err = run(["verify", "--suite", "circuits"], capsys)
    assert code == 1
    rep = json.loads(out)
    assert rep["result"]["first_failure"]["name"] == "always-off"
    assert "always-off" in err
