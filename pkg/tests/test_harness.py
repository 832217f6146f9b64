import json
import math
from pathlib import Path

import pytest

from dcssp import (ExperimentSpec, InstanceError, ParameterSet, load_manifest,
                   run_batch, serialize_instance, write_convergence_csv,
                   write_summary_csv)
from dcssp.engine import IterationRecord, RunResult
from dcssp.harness import _summarize

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def _fake_run(finals):
    runs = []
    for final in finals:
        trace = [IterationRecord(iteration=1, best_so_far=final + 2, iteration_best=final + 2,
                                 feasible_ants=1),
                 IterationRecord(iteration=2, best_so_far=final, iteration_best=final,
                                 feasible_ants=1)]
        runs.append(RunResult(best_solution=None, best_cost=final, trace=trace, rng_seed=0))
    return runs


PS = ParameterSet("x", "2.0", "1.0", "0.25")


def test_statistics_of_identical_runs():
    sr = _summarize(PS, _fake_run([6.0, 6.0, 6.0]))
    assert sr.c_min == 6.0
    assert sr.c_avg == 6.0
    assert sr.cv_percent == 0.0


def test_statistics_sample_standard_deviation():
    sr = _summarize(PS, _fake_run([4.0, 6.0]))
    assert sr.c_avg == 5.0
    assert abs(sr.cv_percent - 100.0 * math.sqrt(2.0) / 5.0) < 1e-12
    assert abs(sr.cv_percent - 28.284271247461902) < 1e-9


def test_statistics_are_permutation_invariant():
    a = _summarize(PS, _fake_run([4.0, 9.0, 6.0]))
    b = _summarize(PS, _fake_run([9.0, 6.0, 4.0]))
    assert (a.c_min, a.c_avg, a.cv_percent) == (b.c_min, b.c_avg, b.cv_percent)


def test_single_run_has_zero_cv():
    sr = _summarize(PS, _fake_run([7.5]))
    assert sr.cv_percent == 0.0


def _mini_spec(t1, runs=2, iterations=10):
    sets = [ParameterSet("1", "2.0", "1.0", "0.25"),
            ParameterSet("3", "2/(n + 0.01)", "0.1n", "0.25")]
    return ExperimentSpec(instance=t1, sets=sets, runs_per_set=runs, base_seed=5,
                          ants=5, iterations=iterations)


def test_batch_runs_and_csv_shapes(t1, tmp_path):
    result = run_batch(_mini_spec(t1))
    conv = tmp_path / "convergence.csv"
    summ = tmp_path / "summary.csv"
    write_convergence_csv(result, conv)
    write_summary_csv(result, summ)
    conv_lines = conv.read_text().strip().split("\n")
    assert len(conv_lines) == 1 + 2 * 10
    assert conv_lines[0] == "set_label,iteration,mean_best_so_far,best_run_best_so_far"
    summ_lines = summ.read_text().strip().split("\n")
    assert len(summ_lines) == 3
    assert summ_lines[0] == "set_label,rho,alpha,beta,c_min,c_avg,cv_percent"


def test_summary_csv_round_trips_statistics(t1, tmp_path):
    result = run_batch(_mini_spec(t1))
    path = tmp_path / "summary.csv"
    write_summary_csv(result, path)
    rows = path.read_text().strip().split("\n")[1:]
    for row, sr in zip(rows, result.sets):
        label, rho, alpha, beta, c_min, c_avg, cv = row.split(",")
        assert label == sr.params.label
        assert float(c_min) == sr.c_min
        assert float(c_avg) == sr.c_avg
        assert float(cv) == sr.cv_percent


def test_mean_curves_are_non_increasing(t1):
    result = run_batch(_mini_spec(t1, runs=3, iterations=15))
    for sr in result.sets:
        curve = sr.mean_curve
        assert all(a >= b for a, b in zip(curve, curve[1:]))


def test_batch_is_bit_reproducible(t1, tmp_path):
    for tag in ("a", "b"):
        result = run_batch(_mini_spec(t1))
        write_convergence_csv(result, tmp_path / f"conv_{tag}.csv")
        write_summary_csv(result, tmp_path / f"summ_{tag}.csv")
    assert (tmp_path / "conv_a.csv").read_bytes() == (tmp_path / "conv_b.csv").read_bytes()
    assert (tmp_path / "summ_a.csv").read_bytes() == (tmp_path / "summ_b.csv").read_bytes()


def test_manifest_with_instance_path(t1, tmp_path):
    inst_path = tmp_path / "inst.json"
    inst_path.write_text(serialize_instance(t1))
    manifest = {
        "instance": "inst.json",
        "sets": [{"label": "only", "alpha": "2.0", "beta": "1.0", "rho": "0.25"}],
        "runs": 2, "ants": 3, "iterations": 4, "seed": 9, "local_search": False,
    }
    spec = load_manifest(json.dumps(manifest), base_dir=tmp_path)
    assert spec.instance == t1
    assert spec.runs_per_set == 2
    assert spec.ants == 3
    assert not spec.local_search
    spec.validate()


def test_bundled_manifest_loads():
    spec = load_manifest((FIXTURES / "table1_manifest.json").read_text(),
                         base_dir=FIXTURES)
    assert [ps.label for ps in spec.sets] == ["1", "2", "3", "4"]
    assert spec.runs_per_set == 30
    assert spec.iterations == 500
    assert spec.instance.n_loops == 200
    assert spec.instance.n_types == 5
    assert spec.instance.limits.levels == 4
    spec.validate()


def test_manifest_rejects_unknown_keys():
    with pytest.raises(InstanceError, match="unknown key"):
        load_manifest(json.dumps({"instance": {"profile": "plc-io", "u": 2, "a": 5, "s": 2},
                                  "sets": [], "extra": 1}))


def test_spec_validation_catches_bad_schedules(t1):
    spec = ExperimentSpec(instance=t1,
                          sets=[ParameterSet("bad", "2.0", "1.0", "n")],
                          runs_per_set=1, iterations=3)
    with pytest.raises(ValueError, match=r"rho out of \[0,1\]"):
        spec.validate()
