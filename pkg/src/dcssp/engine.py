"""Ant colony engine: probabilistic construction, pheromone management, runs.

Selection follows the classic proportional rule: option i is drawn with
probability tau_i^alpha * eta_i^beta normalized over the candidate set. The
pheromone state is split into three fixed-shape tables so every cell is
addressable independently of any particular tree:

* type table, indexed by (level of the node being typed, parent type or the
  synthetic root context, candidate type);
* child-count table, indexed by (level, node type, count - 1);
* loop-level table, indexed by (loop, processing level).

Each iteration evaporates all mass by the scheduled rate, then the best
feasible ant of the iteration deposits along its decision trace. All mass is
clamped to [tau_min, tau_max] so no option ever becomes unreachable and no
single path can lock the search in.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .arrays import InstanceArrays, solution_from_arrays
from .instance import ProblemInstance
from .schedule import (ScheduleExpr, eval_schedule, parse_schedule,
                       validate_schedule_range)
from .structure import Solution, check_feasibility

_FAILURE_STEPS = {
    1: "child count (device has no ports)",
    2: "degenerate selection weights",
    3: "connect leaf (no channel capacity left)",
    4: "processing level (no admissible processor)",
    5: "node capacity exceeded",
}


class ConstructionFailed(RuntimeError):
    """An ant starved at some step; carries which step."""

    def __init__(self, step: str):
        super().__init__(f"construction failed at step: {step}")
        self.step = step


def _as_expr(value: ScheduleExpr | str | float) -> ScheduleExpr:
    if isinstance(value, (int, float)):
        value = repr(float(value))
    if isinstance(value, str):
        return parse_schedule(value)
    return value


@dataclass
class AcoParams:
    n_ants: int = 20
    n_iterations: int = 500
    alpha: ScheduleExpr | str = "2.0"
    beta: ScheduleExpr | str = "1.0"
    rho: ScheduleExpr | str = "0.25"
    seed: int = 1
    tau0: float = 1.0
    tau_min: float = 0.01
    tau_max: float = 10.0
    deposit_scale: float | str = "auto"
    local_search: bool = True
    ls_move_budget: int | None = None

    def __post_init__(self):
        self.alpha = _as_expr(self.alpha)
        self.beta = _as_expr(self.beta)
        self.rho = _as_expr(self.rho)
        if self.n_ants < 1 or self.n_iterations < 1:
            raise ValueError("n_ants and n_iterations must be ≥ 1")
        if not 0 < self.tau_min <= self.tau0 <= self.tau_max:
            raise ValueError("need 0 < tau_min ≤ tau0 ≤ tau_max")
        if self.deposit_scale != "auto" and not float(self.deposit_scale) > 0:
            raise ValueError("deposit_scale must be positive or 'auto'")

    def validate_schedules(self) -> None:
        """Raise ValueError naming the first out-of-domain schedule value."""
        for role, expr in (("alpha", self.alpha), ("beta", self.beta), ("rho", self.rho)):
            bad = validate_schedule_range(expr, self.n_iterations, role)
            if bad:
                raise ValueError(str(bad[0]))


class PheromoneTables:
    """The three pheromone tables plus their clamping bounds."""

    def __init__(self, n_levels: int, n_types: int, max_count: int, n_loops: int,
                 tau0: float = 1.0, tau_min: float = 0.01, tau_max: float = 10.0):
        if not 0 < tau_min <= tau0 <= tau_max:
            raise ValueError("need 0 < tau_min ≤ tau0 ≤ tau_max")
        self.tau_min = tau_min
        self.tau_max = tau_max
        self.type_table = np.full((n_levels, n_types + 1, n_types), tau0, np.float64)
        self.count_table = np.full((n_levels, n_types, max(max_count, 1)), tau0, np.float64)
        self.loop_level_table = np.full((n_loops, n_levels), tau0, np.float64)

    @classmethod
    def for_instance(cls, inst: ProblemInstance, params: AcoParams) -> "PheromoneTables":
        m_max = max(d.max_children for d in inst.devices)
        return cls(inst.limits.levels, inst.n_types, m_max, inst.n_loops,
                   tau0=params.tau0, tau_min=params.tau_min, tau_max=params.tau_max)

    def _tables(self) -> tuple[np.ndarray, ...]:
        return (self.type_table, self.count_table, self.loop_level_table)

    def evaporate(self, rho: float) -> None:
        """Multiply every cell by (1 - rho), then clamp."""
        if not 0.0 <= rho <= 1.0:
            raise ValueError(f"rho out of [0,1]: {rho}")
        for t in self._tables():
            t *= 1.0 - rho
            np.clip(t, self.tau_min, self.tau_max, out=t)

    def deposit(self, trace: "DecisionTrace", amount: float) -> None:
        """Add ``amount`` to every traced cell (once per occurrence), then clamp."""
        if amount < 0:
            raise ValueError("deposit amount must be ≥ 0")
        for ti, table in enumerate(self._tables()):
            cells = trace.cells[trace.tables == ti]
            if cells.size:
                flat = table.reshape(-1)
                np.add.at(flat, cells, amount)
            np.clip(table, self.tau_min, self.tau_max, out=table)

    def copy(self) -> "PheromoneTables":
        dup = PheromoneTables.__new__(PheromoneTables)
        dup.tau_min = self.tau_min
        dup.tau_max = self.tau_max
        dup.type_table = self.type_table.copy()
        dup.count_table = self.count_table.copy()
        dup.loop_level_table = self.loop_level_table.copy()
        return dup


@dataclass(frozen=True)
class DecisionTrace:
    """Every pheromone-weighted choice an ant made: (table id, flat cell)."""

    tables: np.ndarray
    cells: np.ndarray

    def __len__(self) -> int:
        return len(self.tables)


def evaporate(tables: PheromoneTables, rho: float) -> None:
    tables.evaporate(rho)


def deposit(tables: PheromoneTables, trace: DecisionTrace, amount: float) -> None:
    tables.deposit(trace, amount)


def selection_weights(options, alpha: float, beta: float) -> np.ndarray:
    """Unnormalized weights tau^alpha * eta^beta for an option list."""
    if alpha < 0 or beta < 0:
        raise ValueError("alpha and beta must be ≥ 0")
    w = np.array([tau ** alpha * eta ** beta for tau, eta in options], np.float64)
    return w


def select_option(options, alpha: float, beta: float, rng: np.random.Generator) -> int:
    """Draw an option index with the proportional selection probabilities.

    ``options`` is a sequence of (pheromone mass, desirability) pairs. Raises
    :class:`ConstructionFailed` when the weights are all zero or non-finite.
    """
    if len(options) == 0:
        raise ValueError("options must be non-empty")
    w = selection_weights(options, alpha, beta)
    total = float(np.sum(w))
    if not math.isfinite(total) or total <= 0.0 or not np.all(np.isfinite(w)):
        raise ConstructionFailed("degenerate selection weights")
    threshold = rng.random() * total
    acc = 0.0
    for i, wi in enumerate(w):
        acc += wi
        if acc > threshold:
            return i
    return len(options) - 1


def construct_solution(inst: ProblemInstance, tables: PheromoneTables,
                       alpha: float, beta: float,
                       rng: np.random.Generator | int) -> tuple[Solution, DecisionTrace]:
    """Build one candidate via the kernel and verify it end to end.

    ``rng`` may be a numpy Generator (a 64-bit stream seed is drawn from it)
    or an integer seed. Raises :class:`ConstructionFailed` when the ant
    starves; otherwise the returned solution has passed the full constraint
    check.
    """
    if isinstance(rng, np.random.Generator):
        seed = int(rng.integers(0, 2 ** 64, dtype=np.uint64))
    else:
        seed = int(rng)
    arrays = InstanceArrays.from_instance(inst)
    res = kernels.construct_tree(
        *arrays.instance_args,
        tables.type_table, tables.count_table, tables.loop_level_table,
        float(alpha), float(beta), np.uint64(seed), arrays.node_cap)
    status = int(res[0])
    if status != 0:
        raise ConstructionFailed(_FAILURE_STEPS.get(status, f"status {status}"))
    nn = int(res[1])
    sol = solution_from_arrays(res[2], res[3], res[4], nn, res[5], res[6])
    report = check_feasibility(sol, inst)
    if not report.feasible:  # pragma: no cover - construction prevents this
        raise ConstructionFailed(f"post-construction check: {report.violations[0]}")
    ntrace = int(res[9])
    trace = DecisionTrace(tables=res[7][:ntrace].copy(), cells=res[8][:ntrace].copy())
    return sol, trace


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    best_so_far: float
    iteration_best: float       # nan when no ant was feasible
    feasible_ants: int


@dataclass
class RunResult:
    best_solution: Solution | None
    best_cost: float            # inf when no feasible solution was found
    trace: list[IterationRecord] = field(default_factory=list)
    rng_seed: int = 0


def run_aco(inst: ProblemInstance, params: AcoParams) -> RunResult:
    """Full iteration loop; deterministic for a fixed seed.

    Per iteration: evaluate the three schedules at n, launch the ants (each on
    its own derived stream), evaporate, optionally locally improve the best
    feasible ant, deposit Q/cost along its construction trace, and record the
    convergence row. Q defaults to the first feasible cost ever constructed.
    """
    params.validate_schedules()
    arrays = InstanceArrays.from_instance(inst)
    tables = PheromoneTables.for_instance(inst, params)
    budget = (1 << 62) if params.ls_move_budget is None else params.ls_move_budget

    q_scale = None if params.deposit_scale == "auto" else float(params.deposit_scale)
    best_cost = math.inf
    best_arrays = None
    records: list[IterationRecord] = []

    for n in range(1, params.n_iterations + 1):
        alpha = eval_schedule(params.alpha, n)
        beta = eval_schedule(params.beta, n)
        rho = eval_schedule(params.rho, n)

        it_cost = math.inf
        it_best = None
        feasible = 0
        for a in range(params.n_ants):
            seed = kernels.derive_seed(params.seed, n, a)
            res = kernels.construct_tree(
                *arrays.instance_args,
                tables.type_table, tables.count_table, tables.loop_level_table,
                alpha, beta, np.uint64(seed), arrays.node_cap)
            if int(res[0]) != 0:
                continue
            nn = int(res[1])
            code = kernels.solution_feasible(res[2], res[3], res[4], nn, res[5], res[6],
                                             *arrays.instance_args)
            if int(code) != 0:  # discard the violating ant
                continue
            feasible += 1
            cost = float(kernels.tree_cost(res[2], nn, arrays.cost))
            if q_scale is None:
                q_scale = cost
            if cost < it_cost:
                it_cost = cost
                it_best = res

        tables.evaporate(rho)

        if it_best is not None:
            nn = int(it_best[1])
            if params.local_search and budget > 0:
                it_cost, _ = kernels.improve_types(
                    it_best[2], it_best[3], it_best[4], nn, it_best[5], it_best[6],
                    *arrays.instance_args, budget)
                it_cost = float(it_cost)
            ntrace = int(it_best[9])
            trace = DecisionTrace(tables=it_best[7][:ntrace], cells=it_best[8][:ntrace])
            tables.deposit(trace, q_scale / it_cost)
            if it_cost < best_cost:
                best_cost = it_cost
                best_arrays = (it_best[2][:nn].copy(), it_best[3][:nn].copy(),
                               it_best[4][:nn].copy(), nn,
                               it_best[5].copy(), it_best[6].copy())

        records.append(IterationRecord(
            iteration=n, best_so_far=best_cost,
            iteration_best=(it_cost if it_best is not None else math.nan),
            feasible_ants=feasible))

    best_solution = None
    if best_arrays is not None:
        best_solution = solution_from_arrays(*best_arrays)
    return RunResult(best_solution=best_solution, best_cost=best_cost,
                     trace=records, rng_seed=params.seed)
