"""Multi-run experiment batches: statistics and convergence curves.

A batch runs one instance under several (alpha, beta, rho) parameter sets,
``runs_per_set`` independent seeded runs each, and reports per set the best
final cost, the mean final cost, the coefficient of variation of the final
costs (sample standard deviation, n-1 denominator, as a percentage of the
mean), and the per-iteration mean best-so-far curve. Run seeds derive
deterministically from (base seed, set index, run index), so a batch is
reproducible bit for bit regardless of scheduling.

Before a run finds its first feasible solution its best-so-far is infinite;
the mean curve therefore starts at ``inf`` when any run is still searching,
which keeps it non-increasing. Runs that never find a feasible solution are
excluded from the final-cost statistics.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .engine import AcoParams, RunResult, run_aco
from .instance import (GeneratorSettings, InstanceError, ProblemInstance,
                       generate_instance, parse_instance)
from .kernels import derive_seed
from .schedule import parse_schedule, validate_schedule_range


@dataclass(frozen=True)
class ParameterSet:
    label: str
    alpha: str
    beta: str
    rho: str


@dataclass
class ExperimentSpec:
    instance: ProblemInstance
    sets: list[ParameterSet]
    runs_per_set: int = 30
    base_seed: int = 1
    ants: int = 20
    iterations: int = 500
    local_search: bool = True

    def validate(self) -> None:
        if not self.sets:
            raise ValueError("an experiment needs at least one parameter set")
        if self.runs_per_set < 1:
            raise ValueError("runs_per_set must be ≥ 1")
        for ps in self.sets:
            for role, text in (("alpha", ps.alpha), ("beta", ps.beta), ("rho", ps.rho)):
                bad = validate_schedule_range(parse_schedule(text), self.iterations, role)
                if bad:
                    raise ValueError(f"set {ps.label}: {bad[0]}")


@dataclass(frozen=True)
class SetResult:
    params: ParameterSet
    final_costs: tuple[float, ...]
    c_min: float
    c_avg: float
    cv_percent: float
    mean_curve: tuple[float, ...]       # mean over runs of best-so-far, per iteration
    best_run_curve: tuple[float, ...]   # best-so-far curve of the run achieving c_min


@dataclass
class BatchResult:
    sets: list[SetResult] = field(default_factory=list)


def _summarize(params: ParameterSet, runs: list[RunResult]) -> SetResult:
    finals = [r.best_cost for r in runs]
    finite = [c for c in finals if math.isfinite(c)]
    if not finite:
        raise RuntimeError(f"set {params.label}: no run found a feasible solution")
    c_min = min(finite)
    c_avg = float(np.mean(finite))
    if len(finite) > 1:
        cv = 100.0 * float(np.std(finite, ddof=1)) / c_avg
    else:
        cv = 0.0
    curves = np.array([[rec.best_so_far for rec in r.trace] for r in runs])
    mean_curve = curves.mean(axis=0)
    best_idx = finals.index(c_min)
    return SetResult(params=params, final_costs=tuple(finals), c_min=c_min, c_avg=c_avg,
                     cv_percent=cv, mean_curve=tuple(float(x) for x in mean_curve),
                     best_run_curve=tuple(float(x) for x in curves[best_idx]))


def run_batch(spec: ExperimentSpec) -> BatchResult:
    """Execute every (set, run) pair sequentially with derived seeds."""
    spec.validate()
    result = BatchResult()
    for si, ps in enumerate(spec.sets):
        runs = []
        for ri in range(spec.runs_per_set):
            seed = derive_seed(spec.base_seed, si, ri)
            params = AcoParams(n_ants=spec.ants, n_iterations=spec.iterations,
                               alpha=ps.alpha, beta=ps.beta, rho=ps.rho,
                               seed=seed, local_search=spec.local_search)
            runs.append(run_aco(spec.instance, params))
        result.sets.append(_summarize(ps, runs))
    return result


def write_convergence_csv(result: BatchResult, path: str | Path) -> None:
    """Columns: set_label,iteration,mean_best_so_far,best_run_best_so_far."""
    lines = ["set_label,iteration,mean_best_so_far,best_run_best_so_far"]
    for sr in result.sets:
        for i, (mean, best) in enumerate(zip(sr.mean_curve, sr.best_run_curve), start=1):
            lines.append(f"{sr.params.label},{i},{mean!r},{best!r}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_summary_csv(result: BatchResult, path: str | Path) -> None:
    """Columns: set_label,rho,alpha,beta,c_min,c_avg,cv_percent."""
    lines = ["set_label,rho,alpha,beta,c_min,c_avg,cv_percent"]
    for sr in result.sets:
        p = sr.params
        lines.append(f"{p.label},{p.rho},{p.alpha},{p.beta},"
                     f"{sr.c_min!r},{sr.c_avg!r},{sr.cv_percent!r}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


# --- Manifest loading --------------------------------------------------------

_MANIFEST_KEYS = {"instance", "sets", "runs", "ants", "iterations", "seed", "local_search"}
_SET_KEYS = {"label", "alpha", "beta", "rho"}
_GEN_KEYS = {"profile", "u", "a", "s", "seed"}


def load_manifest(text: str, base_dir: str | Path = ".") -> ExperimentSpec:
    """Parse an experiment manifest JSON document.

    ``instance`` is either a path to an instance file (relative to
    ``base_dir``) or an inline generator-settings object with keys
    ``profile,u,a,s,seed``.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise InstanceError(f"manifest syntax error at line {e.lineno}: {e.msg}") from None
    if not isinstance(doc, dict):
        raise InstanceError("manifest must be an object")
    unknown = set(doc) - _MANIFEST_KEYS
    if unknown:
        raise InstanceError(f"manifest: unknown key '{sorted(unknown)[0]}'")
    for key in ("instance", "sets"):
        if key not in doc:
            raise InstanceError(f"manifest: missing key '{key}'")

    src = doc["instance"]
    if isinstance(src, str):
        inst = parse_instance((Path(base_dir) / src).read_text(encoding="utf-8"))
    elif isinstance(src, dict):
        unknown = set(src) - _GEN_KEYS
        if unknown:
            raise InstanceError(f"manifest instance: unknown key '{sorted(unknown)[0]}'")
        settings = GeneratorSettings(
            n_types=int(src.get("u", 2)), n_loops=int(src.get("a", 50)),
            levels=int(src.get("s", 3)), profile=src.get("profile", "random"),
            seed=int(src.get("seed", 1)))
        inst = generate_instance(settings)
    else:
        raise InstanceError("manifest instance must be a path or a generator object")

    sets = []
    for i, obj in enumerate(doc["sets"]):
        if not isinstance(obj, dict) or set(obj) - _SET_KEYS:
            raise InstanceError(f"manifest sets[{i}]: expected keys label/alpha/beta/rho")
        sets.append(ParameterSet(label=str(obj.get("label", i + 1)),
                                 alpha=str(obj.get("alpha", "2.0")),
                                 beta=str(obj.get("beta", "1.0")),
                                 rho=str(obj.get("rho", "0.25"))))

    return ExperimentSpec(
        instance=inst, sets=sets,
        runs_per_set=int(doc.get("runs", 30)),
        base_seed=int(doc.get("seed", 1)),
        ants=int(doc.get("ants", 20)),
        iterations=int(doc.get("iterations", 500)),
        local_search=bool(doc.get("local_search", True)),
    )
