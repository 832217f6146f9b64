"""Exhaustive ground-truth solver for small instances.

Enumerates every proper-hierarchy tree up to a node budget (children chosen
as non-decreasing type multisets, deduplicated by canonical signature), and
for each structure searches for any feasible loop placement by depth-first
assignment with constraint propagation. Since the objective only sums device
costs, the optimum is the cheapest structure that admits a feasible
placement. A lower-bound cut (committed cost plus the cheapest possible
completion against the incumbent) can be disabled to cross-check counts and
optima against the pruned search.

This is deliberately not a scalable solver; it exists to supply provable
optima for acceptance testing.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from itertools import combinations_with_replacement

from .instance import DeviceType, ProblemInstance
from .structure import (LoopPlacement, Node, Solution, canonical_signature,
                        check_feasibility)


class OracleBudgetExceeded(RuntimeError):
    """The time budget ran out before the enumeration completed."""


@dataclass(frozen=True)
class OracleResult:
    solution: Solution | None
    cost: float | None
    enumerated: int              # distinct canonical structures examined


@dataclass
class _TreeNode:
    type_id: int
    parent: int | None
    level: int
    children: list[int]


def _min_completion_cost(inst: ProblemInstance, frontier: list[_TreeNode],
                         min_cost_any: float, min_cost_rep: float) -> float:
    """Cheapest conceivable cost of descendants still owed by the frontier."""
    S = inst.limits.levels
    extra = 0.0
    for nd in frontier:
        owed = S - nd.level
        if owed <= 0:
            continue
        per = min_cost_rep if not inst.device(nd.type_id).is_processor else min_cost_any
        if per == float("inf"):
            return float("inf")
        extra += owed * per
    return extra


def _placement_search(inst: ProblemInstance, nodes: list[_TreeNode]) -> list[LoopPlacement] | None:
    """Find any feasible placement of all loops on the given structure."""
    S = inst.limits.levels
    leaves = [i for i, nd in enumerate(nodes) if not nd.children]

    # Static admissibility of (leaf, processing node) pairs: processor mode,
    # reliability floor, delay cap. Memory/cycle/channels are dynamic.
    static_pairs: list[tuple[int, int]] = []
    for leaf in leaves:
        rel = 1.0
        dly = 0.0
        v: int | None = leaf
        while v is not None:
            dev = inst.device(nodes[v].type_id)
            rel *= 1.0 - dev.fail_prob
            if (dev.is_processor and rel >= inst.limits.min_loop_reliability
                    and dly <= inst.limits.max_loop_delay):
                static_pairs.append((leaf, v))
            dly += dev.relay_delay
            v = nodes[v].parent
    static_pairs.sort()
    if not static_pairs:
        return None

    rem_channels = {leaf: inst.device(nodes[leaf].type_id).channels for leaf in leaves}
    rem_memory = {i: inst.device(nd.type_id).memory for i, nd in enumerate(nodes)}
    used_instr = {i: 0 for i in range(len(nodes))}

    placements: list[LoopPlacement] = []

    def assign(j: int) -> bool:
        if j > inst.n_loops:
            return True
        loop = inst.loop(j)
        for leaf, proc in static_pairs:
            if rem_channels[leaf] < loop.signals:
                continue
            if rem_memory[proc] < loop.mem_demand:
                continue
            dev = inst.device(nodes[proc].type_id)
            if dev.instr_time * (used_instr[proc] + loop.instr_count) > inst.limits.max_cycle_time:
                continue
            rem_channels[leaf] -= loop.signals
            rem_memory[proc] -= loop.mem_demand
            used_instr[proc] += loop.instr_count
            placements.append(LoopPlacement(loop_id=j, connect_leaf=leaf, process_node=proc))
            if assign(j + 1):
                return True
            placements.pop()
            rem_channels[leaf] += loop.signals
            rem_memory[proc] += loop.mem_demand
            used_instr[proc] -= loop.instr_count
        return False

    return placements if assign(1) else None


def _to_solution(nodes: list[_TreeNode], placements: list[LoopPlacement]) -> Solution:
    return Solution(
        nodes=tuple(Node(id=i, level=nd.level, type_id=nd.type_id, parent=nd.parent,
                         children=tuple(nd.children)) for i, nd in enumerate(nodes)),
        placements=tuple(sorted(placements, key=lambda p: p.loop_id)),
    )


def solve_exact(inst: ProblemInstance, max_nodes: int, time_budget_s: float = 60.0,
                prune: bool = True) -> OracleResult:
    """Enumerate all structures within ``max_nodes`` and return a provable optimum.

    Returns (None, None, count) when no feasible solution exists within the
    node budget. Raises :class:`OracleBudgetExceeded` when the wall-clock
    budget runs out, which is distinct from infeasibility.
    """
    S = inst.limits.levels
    deadline = time.monotonic() + time_budget_s
    proc_types = [d for d in inst.devices if d.is_processor]
    min_cost_any = min(d.cost for d in inst.devices)
    rep_costs = [d.cost for d in inst.devices if not d.is_processor]
    min_cost_rep = min(rep_costs) if rep_costs else float("inf")

    seen: set[str] = set()
    state = {"count": 0, "best_cost": float("inf")}
    best: dict[str, object] = {"solution": None}

    def allowed_children(parent: DeviceType) -> list[DeviceType]:
        if parent.is_processor:
            return list(inst.devices)
        return [d for d in inst.devices if not d.is_processor]

    def on_complete(nodes: list[_TreeNode], cost: float) -> None:
        sol = _to_solution(nodes, [])
        sig = canonical_signature(sol)
        if sig in seen:
            return
        seen.add(sig)
        state["count"] += 1
        if prune and cost >= state["best_cost"]:
            return
        placements = _placement_search(inst, nodes)
        if placements is None:
            return
        if cost < state["best_cost"]:
            state["best_cost"] = cost
            best["solution"] = _to_solution(nodes, placements)

    def expand_level(nodes: list[_TreeNode], level_nodes: list[int], cost: float) -> None:
        if time.monotonic() > deadline:
            raise OracleBudgetExceeded(f"time budget of {time_budget_s}s exceeded")
        level = nodes[level_nodes[0]].level if level_nodes else S
        if level == S:
            on_complete(nodes, cost)
            return

        def per_node(i: int, new_children: list[tuple[int, int]]) -> None:
            if i == len(level_nodes):
                child_ids = []
                for parent_idx, type_id in new_children:
                    nodes.append(_TreeNode(type_id=type_id, parent=parent_idx,
                                           level=level + 1, children=[]))
                    cid = len(nodes) - 1
                    nodes[parent_idx].children.append(cid)
                    child_ids.append(cid)
                added = sum(inst.device(t).cost for _, t in new_children)
                expand_level(nodes, child_ids, cost + added)
                for cid in reversed(child_ids):
                    nodes[nodes[cid].parent].children.pop()
                    nodes.pop()
                return
            v = level_nodes[i]
            parent_dev = inst.device(nodes[v].type_id)
            kinds = allowed_children(parent_dev)
            for k in range(1, parent_dev.max_children + 1):
                if len(nodes) + len(new_children) + k > max_nodes:
                    break
                for multiset in combinations_with_replacement(kinds, k):
                    batch = [(v, d.id) for d in multiset]
                    added = sum(d.cost for d in multiset)
                    # every new child below level S still owes a chain to the leaves
                    if prune:
                        owed = sum((S - (level + 1)) * (min_cost_rep if not d.is_processor
                                                        else min_cost_any)
                                   for d in multiset)
                        if cost + added + owed >= state["best_cost"]:
                            continue
                    per_node(i + 1, new_children + batch)

        per_node(0, [])

    for root_dev in sorted(proc_types, key=lambda d: d.id):
        if max_nodes < 1:
            break
        root = _TreeNode(type_id=root_dev.id, parent=None, level=1, children=[])
        expand_level([root], [0], root_dev.cost)

    solution = best["solution"]
    if solution is None:
        return OracleResult(solution=None, cost=None, enumerated=state["count"])
    assert isinstance(solution, Solution)
    report = check_feasibility(solution, inst)
    if not report.feasible:  # pragma: no cover - enumeration bug guard
        raise RuntimeError(f"oracle produced an infeasible optimum: {report.violations[0]}")
    return OracleResult(solution=solution, cost=state["best_cost"], enumerated=state["count"])
