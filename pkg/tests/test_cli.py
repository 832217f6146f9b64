import json
from pathlib import Path

from dcssp.cli import build_parser, main

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def test_defaults_mirror_baseline_parameter_row():
    args = build_parser().parse_args(["solve", "--instance", "x.json"])
    assert args.rho == "0.25"
    assert args.alpha == "2.0"
    assert args.beta == "1.0"
    assert args.iterations == 500
    assert args.ants == 20
    assert args.seed == 1
    assert args.local_search is True


def test_gen_validate_solve_pipeline(tmp_path, capsys):
    inst = tmp_path / "inst.json"
    assert main(["gen", "--profile", "plc-io", "--a", "12", "--s", "2",
                 "--seed", "3", "--out", str(inst)]) == 0
    assert main(["validate", "--instance", str(inst)]) == 0

    tree = tmp_path / "best.dot"
    sol = tmp_path / "best.json"
    trace = tmp_path / "trace.csv"
    code = main(["solve", "--instance", str(inst), "--iterations", "40",
                 "--ants", "10", "--seed", "2",
                 "--out-tree", str(tree), "--out-solution", str(sol),
                 "--out-trace", str(trace)])
    out = capsys.readouterr().out
    assert code == 0
    assert out.strip().split("\n")[-1].startswith("best_cost=")
    assert tree.read_text().startswith("digraph")
    parsed = json.loads(sol.read_text())
    assert set(parsed) == {"nodes", "placements"}
    lines = trace.read_text().strip().split("\n")
    assert lines[0] == "iteration,best_so_far,iteration_best,feasible_ants"
    assert len(lines) == 41


def test_solve_rejects_out_of_domain_rho(tmp_path, capsys):
    assert main(["solve", "--instance", str(FIXTURES / "t1.json"), "--rho", "2"]) == 1
    err = capsys.readouterr().err
    assert "rho out of [0,1] at n=1" in err


def test_solve_is_deterministic_across_invocations(tmp_path):
    artifacts = {}
    for tag in ("a", "b"):
        tree = tmp_path / f"{tag}.dot"
        sol = tmp_path / f"{tag}.json"
        trace = tmp_path / f"{tag}.csv"
        assert main(["solve", "--instance", str(FIXTURES / "t1.json"),
                     "--iterations", "30", "--ants", "8", "--seed", "6",
                     "--out-tree", str(tree), "--out-solution", str(sol),
                     "--out-trace", str(trace)]) == 0
        artifacts[tag] = (tree.read_bytes(), sol.read_bytes(), trace.read_bytes())
    assert artifacts["a"] == artifacts["b"]


def test_oracle_command_prints_optimum(tmp_path, capsys):
    out_sol = tmp_path / "opt.json"
    code = main(["oracle", "--instance", str(FIXTURES / "t0.json"),
                 "--max-nodes", "3", "--out-solution", str(out_sol)])
    out = capsys.readouterr().out
    assert code == 0
    assert "optimum=42.0" in out
    assert json.loads(out_sol.read_text())["nodes"]


def test_oracle_reports_infeasible(tmp_path, capsys):
    doc = json.loads((FIXTURES / "t1.json").read_text())
    doc["limits"]["min_loop_reliability"] = 1.0
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(doc))
    assert main(["oracle", "--instance", str(bad), "--max-nodes", "6"]) == 2
    assert "infeasible" in capsys.readouterr().out


def test_experiment_command_writes_csvs(tmp_path):
    manifest = {
        "instance": str(FIXTURES / "t1.json"),
        "sets": [{"label": "1", "alpha": "2.0", "beta": "1.0", "rho": "0.25"},
                 {"label": "3", "alpha": "2/(n + 0.01)", "beta": "0.1n", "rho": "0.25"}],
        "runs": 2, "ants": 4, "iterations": 6, "seed": 1, "local_search": True,
    }
    mpath = tmp_path / "manifest.json"
    mpath.write_text(json.dumps(manifest))
    out_dir = tmp_path / "results"
    assert main(["experiment", "--manifest", str(mpath), "--out-dir", str(out_dir)]) == 0
    summary = (out_dir / "summary.csv").read_text().strip().split("\n")
    assert len(summary) == 3
    convergence = (out_dir / "convergence.csv").read_text().strip().split("\n")
    assert len(convergence) == 1 + 2 * 6


def test_validate_rejects_bad_instance(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    doc = json.loads((FIXTURES / "t0.json").read_text())
    doc["devices"][0]["fail_prob"] = 2.0
    bad.write_text(json.dumps(doc))
    assert main(["validate", "--instance", str(bad)]) == 1
    assert "fail_prob" in capsys.readouterr().err


def test_input_errors_exit_one(capsys):
    assert main(["solve", "--instance", "/nonexistent/path.json"]) == 1
    assert main(["solve", "--instance", str(FIXTURES / "t1.json"),
                 "--alpha", "2**n"]) == 1
    assert main(["frobnicate"]) == 1
    assert main(["solve", "--no-such-flag"]) == 1
    capsys.readouterr()


def test_gen_to_stdout(capsys):
    assert main(["gen", "--profile", "random", "--u", "3", "--a", "5", "--s", "2",
                 "--seed", "4"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert len(doc["devices"]) == 3
    assert len(doc["loops"]) == 5
