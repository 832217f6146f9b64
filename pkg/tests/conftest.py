import numpy as np
import pytest

from dcssp import (ControlLoop, DeviceType, GeneratorSettings, GlobalLimits,
                   LoopPlacement, Node, ProblemInstance, Solution)

# Catalog used across tests: an expensive controller without signal terminals
# and a cheap eight-channel I/O module, both with four downstream ports.
PLC = dict(cost=100.0, channels=0, memory=1000.0, fail_prob=1e-4, instr_time=1e-5,
           mode="processor", max_children=4, relay_delay=5e-4)
IO = dict(cost=10.0, channels=8, memory=1.0, fail_prob=1e-4, instr_time=1e-5,
          mode="repeater", max_children=4, relay_delay=1e-3)


def plc_io_devices():
    return (DeviceType(id=1, **PLC), DeviceType(id=2, **IO))


def make_limits(levels, max_cycle_time=0.1, min_loop_reliability=0.95, max_loop_delay=0.05):
    return GlobalLimits(levels=levels, max_cycle_time=max_cycle_time,
                        min_loop_reliability=min_loop_reliability,
                        max_loop_delay=max_loop_delay)


@pytest.fixture
def t0():
    """One processor type with its own channels, one loop, a single level."""
    dev = DeviceType(id=1, cost=42.0, channels=8, memory=100.0, fail_prob=1e-4,
                     instr_time=1e-5, mode="processor", max_children=2, relay_delay=0.0)
    loop = ControlLoop(id=1, signals=4, mem_demand=5.0, instr_count=50)
    return ProblemInstance(devices=(dev,), loops=(loop,), limits=make_limits(1, min_loop_reliability=0.9))


@pytest.fixture
def t1():
    """Controller + I/O catalog, two 4-signal loops, two levels."""
    loops = tuple(ControlLoop(id=j + 1, signals=4, mem_demand=5.0, instr_count=50)
                  for j in range(2))
    return ProblemInstance(devices=plc_io_devices(), loops=loops, limits=make_limits(2))


@pytest.fixture
def f1():
    """Hand-built feasible pair: controller root with two I/O leaves, 3 loops.

    Leaf 1 carries loops 1 (5 signals) and 3 (3 signals), exactly filling its
    8 channels; leaf 2 carries loop 2 (4 signals). Everything is processed at
    the root.
    """
    loops = (ControlLoop(id=1, signals=5, mem_demand=5.0, instr_count=50),
             ControlLoop(id=2, signals=4, mem_demand=5.0, instr_count=50),
             ControlLoop(id=3, signals=3, mem_demand=5.0, instr_count=50))
    inst = ProblemInstance(devices=plc_io_devices(), loops=loops, limits=make_limits(2))
    sol = Solution(
        nodes=(Node(id=0, level=1, type_id=1, parent=None, children=(1, 2)),
               Node(id=1, level=2, type_id=2, parent=0, children=()),
               Node(id=2, level=2, type_id=2, parent=0, children=())),
        placements=(LoopPlacement(loop_id=1, connect_leaf=1, process_node=0),
                    LoopPlacement(loop_id=2, connect_leaf=2, process_node=0),
                    LoopPlacement(loop_id=3, connect_leaf=1, process_node=0)))
    return inst, sol


@pytest.fixture
def plc_io_a50():
    """The bundled experiment instance: 50 loops over three levels."""
    return GeneratorSettings(n_types=2, n_loops=50, levels=3, profile="plc-io", seed=23)


def tiny_settings(seed: int) -> GeneratorSettings:
    """Small randomized instances the exhaustive oracle can solve globally."""
    r = np.random.default_rng(seed)
    return GeneratorSettings(
        n_types=int(r.integers(2, 4)), n_loops=int(r.integers(2, 6)),
        levels=int(r.integers(2, 4)), seed=seed,
        channel_range=(4, 8), max_children_range=(1, 3), signal_range=(1, 3),
        cost_range=(5.0, 60.0))
