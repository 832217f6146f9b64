"""Flat-array views of instances and solutions, shared by all kernels."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .instance import ProblemInstance
from .structure import LoopPlacement, Node, Solution

# Hard ceiling on per-ant work arrays; the geometric fan-out bound is used
# when smaller. Ants that outgrow it fail with the capacity status.
NODE_CAP_LIMIT = 500_000


def node_capacity(inst: ProblemInstance) -> int:
    """Upper bound on tree size: full fan-out at the widest device type."""
    m_max = max(d.max_children for d in inst.devices)
    cap = 1
    width = 1
    for _ in range(1, inst.limits.levels):
        width *= max(m_max, 1)
        cap += width
        if cap >= NODE_CAP_LIMIT:
            return NODE_CAP_LIMIT
    return cap


@dataclass(frozen=True)
class InstanceArrays:
    """Numpy mirror of a ProblemInstance, in kernel argument order."""

    cost: np.ndarray
    channels: np.ndarray
    memory: np.ndarray
    fail_prob: np.ndarray
    instr_time: np.ndarray
    mode: np.ndarray          # 0 processor, 1 repeater
    max_children: np.ndarray
    relay_delay: np.ndarray
    loop_signals: np.ndarray
    loop_mem: np.ndarray
    loop_instr: np.ndarray
    levels: int
    max_cycle_time: float
    min_reliability: float
    max_forward_delay: float
    node_cap: int

    @classmethod
    def from_instance(cls, inst: ProblemInstance) -> "InstanceArrays":
        dv = inst.devices
        lp = inst.loops
        return cls(
            cost=np.array([d.cost for d in dv], np.float64),
            channels=np.array([d.channels for d in dv], np.int64),
            memory=np.array([d.memory for d in dv], np.float64),
            fail_prob=np.array([d.fail_prob for d in dv], np.float64),
            instr_time=np.array([d.instr_time for d in dv], np.float64),
            mode=np.array([0 if d.is_processor else 1 for d in dv], np.int64),
            max_children=np.array([d.max_children for d in dv], np.int64),
            relay_delay=np.array([d.relay_delay for d in dv], np.float64),
            loop_signals=np.array([l.signals for l in lp], np.int64),
            loop_mem=np.array([l.mem_demand for l in lp], np.float64),
            loop_instr=np.array([l.instr_count for l in lp], np.int64),
            levels=inst.limits.levels,
            max_cycle_time=inst.limits.max_cycle_time,
            min_reliability=inst.limits.min_loop_reliability,
            max_forward_delay=inst.limits.max_loop_delay,
            node_cap=node_capacity(inst),
        )

    @property
    def instance_args(self) -> tuple:
        """The shared tail of every kernel signature."""
        return (self.cost, self.channels, self.memory, self.fail_prob,
                self.instr_time, self.mode, self.max_children, self.relay_delay,
                self.loop_signals, self.loop_mem, self.loop_instr,
                self.levels, self.max_cycle_time, self.min_reliability,
                self.max_forward_delay)


def solution_from_arrays(node_type: np.ndarray, node_level: np.ndarray,
                         node_parent: np.ndarray, nn: int,
                         loop_leaf: np.ndarray, loop_proc: np.ndarray) -> Solution:
    """Materialize a Solution from kernel output (0-based types inside)."""
    children: list[list[int]] = [[] for _ in range(nn)]
    for v in range(nn):
        p = int(node_parent[v])
        if p >= 0:
            children[p].append(v)
    nodes = tuple(
        Node(id=v, level=int(node_level[v]), type_id=int(node_type[v]) + 1,
             parent=(None if node_parent[v] < 0 else int(node_parent[v])),
             children=tuple(children[v]))
        for v in range(nn)
    )
    placements = tuple(
        LoopPlacement(loop_id=j + 1, connect_leaf=int(loop_leaf[j]),
                      process_node=int(loop_proc[j]))
        for j in range(len(loop_leaf))
    )
    return Solution(nodes=nodes, placements=placements)


def solution_to_arrays(sol: Solution, n_loops: int):
    """Flatten a Solution for the kernels. Node ids must be dense 0..n-1."""
    nn = len(sol.nodes)
    node_type = np.empty(nn, np.int64)
    node_level = np.empty(nn, np.int64)
    node_parent = np.empty(nn, np.int64)
    for nd in sol.nodes:
        node_type[nd.id] = nd.type_id - 1
        node_level[nd.id] = nd.level
        node_parent[nd.id] = -1 if nd.parent is None else nd.parent
    loop_leaf = np.full(n_loops, -1, np.int64)
    loop_proc = np.full(n_loops, -1, np.int64)
    for p in sol.placements:
        loop_leaf[p.loop_id - 1] = p.connect_leaf
        loop_proc[p.loop_id - 1] = p.process_node
    return node_type, node_level, node_parent, nn, loop_leaf, loop_proc
