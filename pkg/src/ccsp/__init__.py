"""Exact and approximate algorithms for complete constraint satisfaction problems."""

from .errors import (AlgoMismatch, CcspError, ContradictionDetected, DeadTuple,
                     DistributionNotBalanced, EmptyLabelSet, GadgetNotFound,
                     InstanceSyntaxError, NotInduced2, SearchSpaceTooLarge,
                     TrivialPredicate)
from .instance import (Instance, PartialAssignment, ValidationReport, all_positive_ksat,
                       parse_instance, random_complete_instance, restrict,
                       serialize_instance, validate_complete)
from .oracle import (SolutionSet, count_bound, enumerate_bruteforce,
                     first_solution_bruteforce, min_unsat_bruteforce)

__version__ = "0.1.0"

__all__ = [
    "AlgoMismatch", "CcspError", "ContradictionDetected", "DeadTuple",
    "DistributionNotBalanced", "EmptyLabelSet", "GadgetNotFound", "InstanceSyntaxError",
    "NotInduced2", "SearchSpaceTooLarge", "TrivialPredicate",
    "Instance", "PartialAssignment", "ValidationReport", "all_positive_ksat",
    "parse_instance", "random_complete_instance", "restrict", "serialize_instance",
    "validate_complete", "SolutionSet", "count_bound", "enumerate_bruteforce",
    "first_solution_bruteforce", "min_unsat_bruteforce",
]
