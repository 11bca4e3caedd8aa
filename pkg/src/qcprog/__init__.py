"""Reachability and termination analysis of concurrent quantum programs."""

from .config import DEFAULT as DEFAULT_TOLERANCES, Tolerances
from .fileformat import ProgramFile, load, parse_program
from .linalg import Subspace, support
from .oracle import (
    EnumerationBudget,
    bruteforce_reach,
    bruteforce_terminates_all,
    bruteforce_terminates_fair,
    bruteforce_urr,
    enumerate_pi,
)
from .program import Program, run_path, validate
from .reachability import reach_algorithm1, reach_iterative, urr_algorithm2, urr_iterative
from .superop import SuperOperator, matrix_rep
from .termination import fair_prefix_check, terminates_all, terminates_fair

__all__ = [
    "DEFAULT_TOLERANCES",
    "EnumerationBudget",
    "Program",
    "ProgramFile",
    "Subspace",
    "SuperOperator",
    "Tolerances",
    "bruteforce_reach",
    "bruteforce_terminates_all",
    "bruteforce_terminates_fair",
    "bruteforce_urr",
    "enumerate_pi",
    "fair_prefix_check",
    "load",
    "matrix_rep",
    "parse_program",
    "reach_algorithm1",
    "reach_iterative",
    "run_path",
    "support",
    "terminates_all",
    "terminates_fair",
    "urr_algorithm2",
    "urr_iterative",
    "validate",
]
