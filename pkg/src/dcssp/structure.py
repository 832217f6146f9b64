"""Candidate solutions: the device tree, loop placement, cost, and constraints.

A solution is a rooted tree of device instances layered into levels (root at
level 1, leaves at level S) plus one placement per control loop: the leaf it
is wired to and the processor node that runs it. This module is the readable
reference implementation of the constraint system; the array kernels in
:mod:`dcssp.kernels` mirror it for the hot paths and are tested against it.

Structural malformation (broken parent links, cycles, duplicate ids, missing
or duplicated placements) raises :class:`StructureError`; everything the
constraint system C1..C9 covers is reported as violation data instead.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterator

from .instance import ProblemInstance


class StructureError(ValueError):
    """Solution data that is not a well-formed layered tree with placements."""


@dataclass(frozen=True)
class Node:
    id: int
    level: int
    type_id: int
    parent: int | None
    children: tuple[int, ...]


@dataclass(frozen=True)
class LoopPlacement:
    loop_id: int
    connect_leaf: int
    process_node: int


@dataclass(frozen=True)
class Solution:
    """Value object; invariants are enforced by the checkers, not the constructor."""

    nodes: tuple[Node, ...]
    placements: tuple[LoopPlacement, ...]

    def node(self, node_id: int) -> Node:
        if not 0 <= node_id < len(self.nodes) or self.nodes[node_id].id != node_id:
            raise StructureError(f"unknown node id {node_id}")
        return self.nodes[node_id]

    def placement(self, loop_id: int) -> LoopPlacement:
        for p in self.placements:
            if p.loop_id == loop_id:
                return p
        raise StructureError(f"loop {loop_id} is not placed")


@dataclass(frozen=True)
class ConstraintViolation:
    constraint: str          # "C1".."C9"
    subject: str             # "node 3" or "loop 17"
    measured: float
    limit: float

    def __str__(self) -> str:
        return f"{self.constraint} at {self.subject}: measured {self.measured}, limit {self.limit}"


@dataclass(frozen=True)
class FeasibilityReport:
    feasible: bool
    violations: tuple[ConstraintViolation, ...]


def _check_tree(sol: Solution) -> None:
    """Raise StructureError unless node ids/links form a single rooted tree."""
    n = len(sol.nodes)
    if n == 0:
        raise StructureError("empty solution")
    for i, node in enumerate(sol.nodes):
        if node.id != i:
            raise StructureError(f"node ids must be dense 0..{n - 1}, found {node.id} at index {i}")
    roots = [nd for nd in sol.nodes if nd.parent is None]
    if len(roots) != 1:
        raise StructureError(f"expected exactly one root, found {len(roots)}")
    seen_child: set[int] = set()
    for nd in sol.nodes:
        for c in nd.children:
            if not 0 <= c < n:
                raise StructureError(f"node {nd.id} lists unknown child {c}")
            if c in seen_child:
                raise StructureError(f"node {c} has two parents")
            seen_child.add(c)
            if sol.nodes[c].parent != nd.id:
                raise StructureError(f"child link {nd.id}->{c} not mirrored by parent link")
        if nd.parent is not None:
            if not 0 <= nd.parent < n:
                raise StructureError(f"node {nd.id} has unknown parent {nd.parent}")
            if nd.id not in sol.nodes[nd.parent].children:
                raise StructureError(f"parent link {nd.id}->{nd.parent} not mirrored by child list")
    # reachability from the root doubles as the cycle check
    reached = {roots[0].id}
    stack = [roots[0].id]
    while stack:
        for c in sol.nodes[stack.pop()].children:
            if c not in reached:
                reached.add(c)
                stack.append(c)
    if len(reached) != n:
        raise StructureError("solution graph is not connected (or contains a cycle)")


def _check_placements(sol: Solution, inst: ProblemInstance) -> None:
    seen: set[int] = set()
    for p in sol.placements:
        if not 1 <= p.loop_id <= inst.n_loops:
            raise StructureError(f"placement names unknown loop {p.loop_id}")
        if p.loop_id in seen:
            raise StructureError(f"loop {p.loop_id} placed twice")
        seen.add(p.loop_id)
        if sol.node(p.connect_leaf).children:
            raise StructureError(f"loop {p.loop_id} connected to non-leaf node {p.connect_leaf}")
        sol.node(p.process_node)
    if len(seen) != inst.n_loops:
        missing = next(j for j in range(1, inst.n_loops + 1) if j not in seen)
        raise StructureError(f"loop {missing} is not placed")


def _ancestor_path(sol: Solution, leaf: int, stop: int) -> list[Node]:
    """Nodes from ``leaf`` up to and including ``stop``."""
    path = []
    cur: int | None = leaf
    while cur is not None:
        nd = sol.node(cur)
        path.append(nd)
        if cur == stop:
            return path
        cur = nd.parent
    raise StructureError(f"node {stop} is not an ancestor of node {leaf}")


def total_cost(sol: Solution, inst: ProblemInstance) -> float:
    """Sum of device costs over all nodes."""
    return sum(inst.device(nd.type_id).cost for nd in sol.nodes)


def path_reliability(sol: Solution, inst: ProblemInstance, loop_id: int) -> float:
    """Survival probability of the loop's path, leaf through processing node."""
    p = sol.placement(loop_id)
    rel = 1.0
    for nd in _ancestor_path(sol, p.connect_leaf, p.process_node):
        rel *= 1.0 - inst.device(nd.type_id).fail_prob
    return rel


def path_delay(sol: Solution, inst: ProblemInstance, loop_id: int) -> float:
    """Forwarding delay along the loop's path, excluding the processing node."""
    p = sol.placement(loop_id)
    path = _ancestor_path(sol, p.connect_leaf, p.process_node)
    return sum(inst.device(nd.type_id).relay_delay for nd in path[:-1])


def check_feasibility(sol: Solution, inst: ProblemInstance) -> FeasibilityReport:
    """Evaluate the full constraint system C1..C9.

    C1 leaf channel capacity, C2 child fan-out bounds, C3 processor memory,
    C4 processor cycle time, C5 path reliability, C6 forwarding delay,
    C7 processing on processors only, C8 proper hierarchy (root at level 1,
    adjacent-level edges, all leaves at level S), C9 mode monotonicity (every
    descendant of a repeater is a repeater).
    """
    _check_tree(sol)
    _check_placements(sol, inst)
    S = inst.limits.levels
    out: list[ConstraintViolation] = []

    # C8: level discipline.
    for nd in sol.nodes:
        if nd.parent is None and nd.level != 1:
            out.append(ConstraintViolation("C8", f"node {nd.id}", float(nd.level), 1.0))
        if nd.parent is not None:
            plevel = sol.node(nd.parent).level
            if nd.level != plevel + 1:
                out.append(ConstraintViolation("C8", f"node {nd.id}", float(nd.level),
                                               float(plevel + 1)))
        if not nd.children and nd.level != S:
            out.append(ConstraintViolation("C8", f"node {nd.id}", float(nd.level), float(S)))

    # C2: fan-out, and no dangling intermediate devices.
    for nd in sol.nodes:
        dev = inst.device(nd.type_id)
        k = len(nd.children)
        if k > dev.max_children:
            out.append(ConstraintViolation("C2", f"node {nd.id}", float(k), float(dev.max_children)))
        if nd.level < S and k < 1:
            out.append(ConstraintViolation("C2", f"node {nd.id}", 0.0, 1.0))

    # C9: repeaters only have repeater descendants.
    for nd in sol.nodes:
        if nd.parent is not None:
            parent_dev = inst.device(sol.node(nd.parent).type_id)
            if not parent_dev.is_processor and inst.device(nd.type_id).is_processor:
                out.append(ConstraintViolation("C9", f"node {nd.id}", 1.0, 0.0))

    # Aggregate loop demands per node.
    connected_signals = {nd.id: 0 for nd in sol.nodes}
    proc_mem = {nd.id: 0.0 for nd in sol.nodes}
    proc_instr = {nd.id: 0 for nd in sol.nodes}
    for p in sol.placements:
        loop = inst.loop(p.loop_id)
        connected_signals[p.connect_leaf] += loop.signals
        proc_mem[p.process_node] += loop.mem_demand
        proc_instr[p.process_node] += loop.instr_count

    for nd in sol.nodes:
        dev = inst.device(nd.type_id)
        if not nd.children:  # C1 applies to leaves
            if connected_signals[nd.id] > dev.channels:
                out.append(ConstraintViolation("C1", f"node {nd.id}",
                                               float(connected_signals[nd.id]),
                                               float(dev.channels)))
        if dev.is_processor:
            if proc_mem[nd.id] > dev.memory:
                out.append(ConstraintViolation("C3", f"node {nd.id}", proc_mem[nd.id], dev.memory))
            cycle = dev.instr_time * proc_instr[nd.id]
            if cycle > inst.limits.max_cycle_time:
                out.append(ConstraintViolation("C4", f"node {nd.id}", cycle,
                                               inst.limits.max_cycle_time))

    for p in sol.placements:
        subject = f"loop {p.loop_id}"
        proc_dev = inst.device(sol.node(p.process_node).type_id)
        if not proc_dev.is_processor:
            out.append(ConstraintViolation("C7", subject, 0.0, 1.0))
        rel = path_reliability(sol, inst, p.loop_id)
        if rel < inst.limits.min_loop_reliability:
            out.append(ConstraintViolation("C5", subject, rel, inst.limits.min_loop_reliability))
        delay = path_delay(sol, inst, p.loop_id)
        if delay > inst.limits.max_loop_delay:
            out.append(ConstraintViolation("C6", subject, delay, inst.limits.max_loop_delay))

    out.sort(key=lambda v: (v.constraint, v.subject))
    return FeasibilityReport(feasible=not out, violations=tuple(out))


def canonical_signature(sol: Solution) -> str:
    """Order-invariant encoding of the labeled tree plus per-node placements.

    Two solutions get equal signatures exactly when one can be turned into the
    other by reordering children, keeping every node's type and its multiset
    of connected/processed loops. Computed by sorting child signatures
    recursively; node ids never appear in the output.
    """
    _check_tree(sol)
    connected: dict[int, list[int]] = {}
    processed: dict[int, list[int]] = {}
    for p in sol.placements:
        connected.setdefault(p.connect_leaf, []).append(p.loop_id)
        processed.setdefault(p.process_node, []).append(p.loop_id)

    root = next(nd for nd in sol.nodes if nd.parent is None)

    def sig(nd: Node) -> str:
        x = ",".join(str(j) for j in sorted(connected.get(nd.id, ())))
        z = ",".join(str(j) for j in sorted(processed.get(nd.id, ())))
        kids = sorted(sig(sol.node(c)) for c in nd.children)
        return f"(t{nd.type_id};x{x};z{z};{'|'.join(kids)})"

    return sig(root)


def to_dot(sol: Solution, inst: ProblemInstance) -> str:
    """Render the tree as a DOT digraph.

    One graph node per device, labeled ``u<type>/L<level>``; leaf labels also
    carry the total number of connected signals.
    """
    _check_tree(sol)
    signals = {nd.id: 0 for nd in sol.nodes}
    for p in sol.placements:
        signals[p.connect_leaf] += inst.loop(p.loop_id).signals
    lines = ["digraph dcs {"]
    for nd in sol.nodes:
        label = f"u{nd.type_id}/L{nd.level}"
        if not nd.children:
            label += f"\\n{signals[nd.id]} sig"
        lines.append(f'  n{nd.id} [label="{label}"];')
    for nd in sol.nodes:
        for c in nd.children:
            lines.append(f"  n{nd.id} -> n{c};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def serialize_solution(sol: Solution) -> str:
    """Emit the solution JSON document; ``parse_solution`` round-trips it."""
    doc = {
        "nodes": [
            {"id": nd.id, "level": nd.level, "type": nd.type_id,
             "parent": nd.parent, "children": list(nd.children)}
            for nd in sol.nodes
        ],
        "placements": [
            {"loop": p.loop_id, "connect_leaf": p.connect_leaf, "process_node": p.process_node}
            for p in sol.placements
        ],
    }
    return json.dumps(doc, indent=2)


def parse_solution(text: str) -> Solution:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise StructureError(f"syntax error at line {e.lineno}, column {e.colno}: {e.msg}") from None
    if not isinstance(doc, dict) or set(doc) != {"nodes", "placements"}:
        raise StructureError("solution document must have exactly the keys 'nodes' and 'placements'")
    nodes = []
    for obj in doc["nodes"]:
        if set(obj) != {"id", "level", "type", "parent", "children"}:
            raise StructureError("node object must have keys id/level/type/parent/children")
        nodes.append(Node(id=obj["id"], level=obj["level"], type_id=obj["type"],
                          parent=obj["parent"], children=tuple(obj["children"])))
    placements = []
    for obj in doc["placements"]:
        if set(obj) != {"loop", "connect_leaf", "process_node"}:
            raise StructureError("placement object must have keys loop/connect_leaf/process_node")
        placements.append(LoopPlacement(loop_id=obj["loop"], connect_leaf=obj["connect_leaf"],
                                        process_node=obj["process_node"]))
    nodes.sort(key=lambda nd: nd.id)
    placements.sort(key=lambda p: p.loop_id)
    sol = Solution(nodes=tuple(nodes), placements=tuple(placements))
    _check_tree(sol)
    return sol


def iter_leaves(sol: Solution) -> Iterator[Node]:
    for nd in sol.nodes:
        if not nd.children:
            yield nd
