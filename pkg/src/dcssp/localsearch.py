"""Local improvement of a feasible solution by exchanging device types.

Two moves over the fixed tree shape, placements untouched:

* M1, type replacement: one node switches to a strictly cheaper type of the
  same mode, kept only if the solution stays feasible.
* M2, pairwise type swap: two nodes of different types (same mode) exchange
  types. The swap itself never changes the cost, so it is kept only when it
  enables an M1 acceptance at one of the swapped nodes within the same
  composite step.

Scanning is first-improvement in node-id order, repeated until a full pass
accepts nothing or the move budget runs out. The result never costs more
than the input and never leaves the feasible set.
"""

from __future__ import annotations

from . import kernels
from .arrays import InstanceArrays, solution_from_arrays, solution_to_arrays
from .instance import ProblemInstance
from .structure import Solution, check_feasibility

UNLIMITED = 1 << 62


def improve(sol: Solution, inst: ProblemInstance, move_budget: int | None = None) -> Solution:
    """Return an equal-or-cheaper feasible solution; input must be feasible."""
    report = check_feasibility(sol, inst)
    if not report.feasible:
        raise ValueError(f"local search requires a feasible solution: {report.violations[0]}")
    budget = UNLIMITED if move_budget is None else move_budget
    if budget < 0:
        raise ValueError("move_budget must be ≥ 0")
    if budget == 0:
        return sol

    arrays = InstanceArrays.from_instance(inst)
    node_type, node_level, node_parent, nn, loop_leaf, loop_proc = \
        solution_to_arrays(sol, inst.n_loops)
    kernels.improve_types(node_type, node_level, node_parent, nn, loop_leaf, loop_proc,
                          *arrays.instance_args, budget)
    return solution_from_arrays(node_type, node_level, node_parent, nn, loop_leaf, loop_proc)
