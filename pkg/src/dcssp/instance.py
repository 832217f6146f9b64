"""Problem instances: device catalog, control loops, and global limits.

An instance is the immutable input to every solver in this package: a set of
purchasable device types, a set of control loops that must be wired and
processed somewhere, and the global limits (hierarchy depth, cycle-time cap,
reliability floor, forwarding-delay cap). Instances are read from and written
to a strict JSON schema, and can be generated randomly for experiments.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any

import numpy as np

PROCESSOR = "processor"
REPEATER = "repeater"
MODES = (PROCESSOR, REPEATER)


class InstanceError(ValueError):
    """Malformed instance document or invariant violation."""


@dataclass(frozen=True)
class DeviceType:
    """One purchasable device model.

    ``channels`` counts physical signal terminals at the device itself;
    ``max_children`` counts network ports for downstream devices. Repeaters
    only forward signals (with ``relay_delay``), processors also execute loop
    programs against ``memory`` and ``instr_time``.
    """

    id: int
    cost: float
    channels: int
    memory: float
    fail_prob: float
    instr_time: float
    mode: str
    max_children: int
    relay_delay: float

    @property
    def is_processor(self) -> bool:
        return self.mode == PROCESSOR


@dataclass(frozen=True)
class ControlLoop:
    """Resource demands of one control loop: wiring, memory, instructions."""

    id: int
    signals: int
    mem_demand: float
    instr_count: int


@dataclass(frozen=True)
class GlobalLimits:
    levels: int
    max_cycle_time: float
    min_loop_reliability: float
    max_loop_delay: float


@dataclass(frozen=True)
class ProblemInstance:
    devices: tuple[DeviceType, ...]
    loops: tuple[ControlLoop, ...]
    limits: GlobalLimits

    @property
    def n_types(self) -> int:
        return len(self.devices)

    @property
    def n_loops(self) -> int:
        return len(self.loops)

    def device(self, type_id: int) -> DeviceType:
        """Look up a device type by its 1-based id."""
        if not 1 <= type_id <= len(self.devices):
            raise InstanceError(f"unknown device type id {type_id}")
        return self.devices[type_id - 1]

    def loop(self, loop_id: int) -> ControlLoop:
        if not 1 <= loop_id <= len(self.loops):
            raise InstanceError(f"unknown loop id {loop_id}")
        return self.loops[loop_id - 1]


@dataclass(frozen=True)
class Violation:
    """One broken instance invariant: the rule and where it was broken."""

    rule: str
    path: str

    def __str__(self) -> str:
        return f"{self.path}: {self.rule}"


def validate_instance(inst: ProblemInstance) -> list[Violation]:
    """Check every instance invariant; an empty list means the instance is valid."""
    out: list[Violation] = []

    if len(inst.devices) < 1:
        out.append(Violation("U ≥ 1", "devices"))
    if len(inst.loops) < 1:
        out.append(Violation("A ≥ 1", "loops"))
    if inst.devices and not any(d.is_processor for d in inst.devices):
        out.append(Violation("no processor device type", "devices"))

    for i, d in enumerate(inst.devices):
        p = f"devices[{i}]"
        if d.id != i + 1:
            out.append(Violation("device ids must be dense 1..U", f"{p}.id"))
        if d.mode not in MODES:
            out.append(Violation("mode must be 'processor' or 'repeater'", f"{p}.mode"))
        if not d.cost > 0:
            out.append(Violation("DeviceType.cost > 0", f"{p}.cost"))
        if d.channels < 0:
            out.append(Violation("DeviceType.channels ≥ 0", f"{p}.channels"))
        if d.is_processor and not d.memory > 0:
            out.append(Violation("DeviceType.memory > 0 for processor mode", f"{p}.memory"))
        if d.memory < 0:
            out.append(Violation("DeviceType.memory ≥ 0", f"{p}.memory"))
        if not 0.0 <= d.fail_prob <= 1.0:
            out.append(Violation("fail_prob out of [0,1]", f"{p}.fail_prob"))
        if not d.instr_time > 0:
            out.append(Violation("DeviceType.instr_time > 0", f"{p}.instr_time"))
        if d.max_children < 0:
            out.append(Violation("DeviceType.max_children ≥ 0", f"{p}.max_children"))
        if d.relay_delay < 0:
            out.append(Violation("DeviceType.relay_delay ≥ 0", f"{p}.relay_delay"))

    for i, lp in enumerate(inst.loops):
        p = f"loops[{i}]"
        if lp.id != i + 1:
            out.append(Violation("loop ids must be dense 1..A", f"{p}.id"))
        if lp.signals < 1:
            out.append(Violation("ControlLoop.signals ≥ 1", f"{p}.signals"))
        if not lp.mem_demand > 0:
            out.append(Violation("ControlLoop.mem_demand > 0", f"{p}.mem_demand"))
        if lp.instr_count < 1:
            out.append(Violation("ControlLoop.instr_count ≥ 1", f"{p}.instr_count"))

    lim = inst.limits
    if lim.levels < 1:
        out.append(Violation("GlobalLimits.levels ≥ 1", "limits.levels"))
    if not 0.0 <= lim.min_loop_reliability <= 1.0:
        out.append(Violation("min_loop_reliability out of [0,1]", "limits.min_loop_reliability"))
    if lim.max_cycle_time < 0:
        out.append(Violation("GlobalLimits.max_cycle_time ≥ 0", "limits.max_cycle_time"))
    if lim.max_loop_delay < 0:
        out.append(Violation("GlobalLimits.max_loop_delay ≥ 0", "limits.max_loop_delay"))

    return out


# --- JSON schema ------------------------------------------------------------

_DEVICE_KEYS = ("cost", "channels", "memory", "fail_prob", "instr_time",
                "mode", "max_children", "relay_delay")
_LOOP_KEYS = ("signals", "mem_demand", "instr_count")
_LIMIT_KEYS = ("levels", "max_cycle_time", "min_loop_reliability", "max_loop_delay")


def _need(obj: dict, keys: tuple[str, ...], where: str) -> None:
    if not isinstance(obj, dict):
        raise InstanceError(f"{where}: expected an object")
    unknown = set(obj) - set(keys)
    if unknown:
        raise InstanceError(f"{where}: unknown key '{sorted(unknown)[0]}'")
    missing = set(keys) - set(obj)
    if missing:
        raise InstanceError(f"{where}: missing key '{sorted(missing)[0]}'")


def _as_float(v: Any, where: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise InstanceError(f"{where}: expected a number")
    return float(v)


def _as_int(v: Any, where: str) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise InstanceError(f"{where}: expected an integer")
    return v


def parse_instance(text: str) -> ProblemInstance:
    """Parse and validate an instance JSON document.

    Raises :class:`InstanceError` on syntax errors (with line/column), on
    schema violations (unknown/missing keys, wrong types), and on invariant
    violations (naming the broken rule).
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise InstanceError(f"syntax error at line {e.lineno}, column {e.colno}: {e.msg}") from None

    _need(doc, ("devices", "loops", "limits"), "document")
    if not isinstance(doc["devices"], list):
        raise InstanceError("devices: expected an array")
    if not isinstance(doc["loops"], list):
        raise InstanceError("loops: expected an array")

    devices = []
    for i, obj in enumerate(doc["devices"]):
        where = f"devices[{i}]"
        _need(obj, _DEVICE_KEYS, where)
        mode = obj["mode"]
        if mode not in MODES:
            raise InstanceError(f"{where}.mode: expected 'processor' or 'repeater'")
        devices.append(DeviceType(
            id=i + 1,
            cost=_as_float(obj["cost"], f"{where}.cost"),
            channels=_as_int(obj["channels"], f"{where}.channels"),
            memory=_as_float(obj["memory"], f"{where}.memory"),
            fail_prob=_as_float(obj["fail_prob"], f"{where}.fail_prob"),
            instr_time=_as_float(obj["instr_time"], f"{where}.instr_time"),
            mode=mode,
            max_children=_as_int(obj["max_children"], f"{where}.max_children"),
            relay_delay=_as_float(obj["relay_delay"], f"{where}.relay_delay"),
        ))

    loops = []
    for i, obj in enumerate(doc["loops"]):
        where = f"loops[{i}]"
        _need(obj, _LOOP_KEYS, where)
        loops.append(ControlLoop(
            id=i + 1,
            signals=_as_int(obj["signals"], f"{where}.signals"),
            mem_demand=_as_float(obj["mem_demand"], f"{where}.mem_demand"),
            instr_count=_as_int(obj["instr_count"], f"{where}.instr_count"),
        ))

    _need(doc["limits"], _LIMIT_KEYS, "limits")
    limits = GlobalLimits(
        levels=_as_int(doc["limits"]["levels"], "limits.levels"),
        max_cycle_time=_as_float(doc["limits"]["max_cycle_time"], "limits.max_cycle_time"),
        min_loop_reliability=_as_float(doc["limits"]["min_loop_reliability"],
                                       "limits.min_loop_reliability"),
        max_loop_delay=_as_float(doc["limits"]["max_loop_delay"], "limits.max_loop_delay"),
    )

    inst = ProblemInstance(devices=tuple(devices), loops=tuple(loops), limits=limits)
    violations = validate_instance(inst)
    if violations:
        raise InstanceError("; ".join(str(v) for v in violations))
    return inst


def serialize_instance(inst: ProblemInstance) -> str:
    """Emit the instance JSON document. ``parse_instance`` round-trips it."""
    doc = {
        "devices": [
            {
                "cost": d.cost, "channels": d.channels, "memory": d.memory,
                "fail_prob": d.fail_prob, "instr_time": d.instr_time, "mode": d.mode,
                "max_children": d.max_children, "relay_delay": d.relay_delay,
            }
            for d in inst.devices
        ],
        "loops": [
            {"signals": lp.signals, "mem_demand": lp.mem_demand, "instr_count": lp.instr_count}
            for lp in inst.loops
        ],
        "limits": {
            "levels": inst.limits.levels,
            "max_cycle_time": inst.limits.max_cycle_time,
            "min_loop_reliability": inst.limits.min_loop_reliability,
            "max_loop_delay": inst.limits.max_loop_delay,
        },
    }
    return json.dumps(doc, indent=2)


# --- Random generation ------------------------------------------------------

@dataclass(frozen=True)
class GeneratorSettings:
    """Ranges and sizes for random instance generation.

    Two profiles exist. ``random`` draws every device from the ranges below
    (processor costs from the upper half of ``cost_range``, repeater costs
    from the lower half, so the cheap-vs-capable trade-off is meaningful).
    ``plc-io`` is a fixed two-device catalog: an expensive processor without
    signal terminals and a cheap eight-channel repeater, both with four
    downstream ports; only the loops are drawn randomly.
    """

    n_types: int
    n_loops: int
    levels: int
    profile: str = "random"
    seed: int = 1
    cost_range: tuple[float, float] = (5.0, 200.0)
    channel_range: tuple[int, int] = (16, 32)
    max_children_range: tuple[int, int] = (4, 8)
    signal_range: tuple[int, int] = (1, 4)
    mem_demand_range: tuple[float, float] = (1.0, 10.0)
    instr_count_range: tuple[int, int] = (10, 100)
    fail_prob_range: tuple[float, float] = (1e-4, 5e-3)
    relay_delay_range: tuple[float, float] = (1e-4, 2e-3)


_PLC_IO_DEVICES = (
    # Controller board: costly, no signal terminals of its own.
    dict(cost=100.0, channels=0, memory=1000.0, fail_prob=1e-4, instr_time=1e-5,
         mode=PROCESSOR, max_children=4, relay_delay=5e-4),
    # I/O module: cheap, eight signal terminals.
    dict(cost=10.0, channels=8, memory=1.0, fail_prob=1e-4, instr_time=1e-5,
         mode=REPEATER, max_children=4, relay_delay=1e-3),
)


def _check_ranges(s: GeneratorSettings) -> None:
    for name in ("cost_range", "channel_range", "max_children_range", "signal_range",
                 "mem_demand_range", "instr_count_range", "fail_prob_range",
                 "relay_delay_range"):
        lo, hi = getattr(s, name)
        if lo > hi:
            raise InstanceError(f"impossible ranges: {name} min {lo} > max {hi}")
    if s.n_types < 1 or s.n_loops < 1 or s.levels < 1:
        raise InstanceError("generator sizes must satisfy U ≥ 1, A ≥ 1, S ≥ 1")
    if s.channel_range[1] < s.signal_range[1]:
        raise InstanceError("impossible ranges: no device can carry the widest loop")


def generate_instance(settings: GeneratorSettings, seed: int | None = None) -> ProblemInstance:
    """Generate a valid, feasibility-biased instance, deterministic in the seed.

    Loops are drawn first; devices are then sized so that channel capacity,
    processor memory, and cycle-time slack plausibly cover the loop demands.
    With U ≥ 2 the catalog always contains at least one processor and one
    repeater.
    """
    _check_ranges(settings)
    rng = np.random.default_rng(settings.seed if seed is None else seed)
    U, A, S = settings.n_types, settings.n_loops, settings.levels

    sig_lo, sig_hi = settings.signal_range
    signals = rng.integers(sig_lo, sig_hi + 1, size=A)
    mem = rng.uniform(*settings.mem_demand_range, size=A)
    instr = rng.integers(settings.instr_count_range[0], settings.instr_count_range[1] + 1, size=A)
    loops = tuple(
        ControlLoop(id=j + 1, signals=int(signals[j]), mem_demand=float(mem[j]),
                    instr_count=int(instr[j]))
        for j in range(A)
    )

    max_cycle_time = 0.1
    min_loop_reliability = 0.95
    max_loop_delay = 2.0 * S * settings.relay_delay_range[1]
    limits = GlobalLimits(levels=S, max_cycle_time=max_cycle_time,
                          min_loop_reliability=min_loop_reliability,
                          max_loop_delay=max_loop_delay)

    if settings.profile == "plc-io":
        if U != 2:
            raise InstanceError("plc-io profile has exactly 2 device types")
        devices = tuple(DeviceType(id=i + 1, **spec) for i, spec in enumerate(_PLC_IO_DEVICES))
        return ProblemInstance(devices=devices, loops=loops, limits=limits)
    if settings.profile != "random":
        raise InstanceError(f"unknown generator profile '{settings.profile}'")

    # First type is always a processor, second (if any) a repeater.
    modes = [PROCESSOR, REPEATER][:U] + [MODES[int(m)] for m in rng.integers(0, 2, size=max(0, U - 2))]
    total_mem = float(np.sum(mem))
    total_instr = float(np.sum(instr))
    cost_lo, cost_hi = settings.cost_range
    cost_mid = cost_lo + 0.4 * (cost_hi - cost_lo)

    devices = []
    for i in range(U):
        is_proc = modes[i] == PROCESSOR
        cost = rng.uniform(cost_mid, cost_hi) if is_proc else rng.uniform(cost_lo, cost_mid)
        channels = int(rng.integers(settings.channel_range[0], settings.channel_range[1] + 1))
        # Feasibility bias: any single processor can hold and cycle the whole
        # loop set, so trees never depend on a lucky processor mix.
        memory = float(rng.uniform(1.0, 2.0) * total_mem) if is_proc else 1.0
        instr_time = float(rng.uniform(0.4, 1.0) * max_cycle_time / total_instr)
        devices.append(DeviceType(
            id=i + 1,
            cost=float(cost),
            channels=channels,
            memory=memory,
            fail_prob=float(rng.uniform(*settings.fail_prob_range)),
            instr_time=instr_time,
            mode=modes[i],
            max_children=int(rng.integers(settings.max_children_range[0],
                                          settings.max_children_range[1] + 1)),
            relay_delay=float(rng.uniform(*settings.relay_delay_range)),
        ))

    inst = ProblemInstance(devices=tuple(devices), loops=loops, limits=limits)
    violations = validate_instance(inst)
    if violations:  # pragma: no cover - generator bug guard
        raise InstanceError("generator produced an invalid instance: "
                            + "; ".join(str(v) for v in violations))
    return inst
