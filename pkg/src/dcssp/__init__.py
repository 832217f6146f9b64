"""Minimum-cost hierarchical control-system structure synthesis.

Given a catalog of device types and a set of control loops, build the
cheapest multi-level device tree that wires every loop to a leaf, assigns it
to a processor, and satisfies the capacity, performance, reliability, and
topology constraints. The search is an ant colony with iteration-scheduled
parameters and a type-exchange local search; an exhaustive oracle provides
ground truth on small instances.
"""

from .engine import (AcoParams, ConstructionFailed, DecisionTrace,
                     IterationRecord, PheromoneTables, RunResult,
                     construct_solution, deposit, evaporate, run_aco,
                     select_option, selection_weights)
from .harness import (BatchResult, ExperimentSpec, ParameterSet, SetResult,
                      load_manifest, run_batch, write_convergence_csv,
                      write_summary_csv)
from .instance import (ControlLoop, DeviceType, GeneratorSettings, GlobalLimits,
                       InstanceError, ProblemInstance, Violation,
                       generate_instance, parse_instance, serialize_instance,
                       validate_instance)
from .localsearch import improve
from .oracle import OracleBudgetExceeded, OracleResult, solve_exact
from .schedule import (ScheduleEvalError, ScheduleExpr, ScheduleSyntaxError,
                       ScheduleViolation, eval_schedule, parse_schedule,
                       pretty_schedule, validate_schedule_range)
from .structure import (ConstraintViolation, FeasibilityReport, LoopPlacement,
                        Node, Solution, StructureError, canonical_signature,
                        check_feasibility, parse_solution, path_delay,
                        path_reliability, serialize_solution, to_dot,
                        total_cost)

__version__ = "0.1.0"

__all__ = [
    "AcoParams", "BatchResult", "ConstraintViolation", "ConstructionFailed",
    "ControlLoop", "DecisionTrace", "DeviceType", "ExperimentSpec",
    "FeasibilityReport", "GeneratorSettings", "GlobalLimits", "InstanceError",
    "IterationRecord", "LoopPlacement", "Node", "OracleBudgetExceeded",
    "OracleResult", "ParameterSet", "PheromoneTables", "ProblemInstance",
    "RunResult", "ScheduleEvalError", "ScheduleExpr", "ScheduleSyntaxError",
    "ScheduleViolation", "SetResult", "Solution", "StructureError", "Violation",
    "canonical_signature", "check_feasibility", "construct_solution", "deposit",
    "eval_schedule", "evaporate", "generate_instance", "improve",
    "load_manifest", "parse_instance", "parse_schedule", "parse_solution",
    "path_delay", "path_reliability", "pretty_schedule", "run_aco", "run_batch",
    "select_option", "selection_weights", "serialize_instance",
    "serialize_solution", "solve_exact", "to_dot", "total_cost",
    "validate_instance", "validate_schedule_range", "write_convergence_csv",
    "write_summary_csv",
]
