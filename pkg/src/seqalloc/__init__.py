"""Sequential allocation of indivisible goods: mechanism, welfare solvers, oracle."""

from .mechanism import (
    SizeGuardExceeded,
    improve_allocation,
    is_reachable,
    pareto_check_bruteforce,
    simulate,
    synthesize_policy,
)
from .model import (
    Allocation,
    DecisionProblem,
    Instance,
    InstanceError,
    Mode,
    Objective,
    PolicyClass,
    PreferenceProfile,
    WelfareReport,
    classify_policy,
    derive_rankings,
    format_policy,
    load_instance,
    make_instance,
    pad_to_multiple,
    parse_policy,
    welfare,
)
from .solvers import DecisionAnswer, ExactOnlyUnavailable, OptimumResult, decide, optimize

__all__ = [
    "Allocation",
    "DecisionAnswer",
    "DecisionProblem",
    "ExactOnlyUnavailable",
    "Instance",
    "InstanceError",
    "Mode",
    "Objective",
    "OptimumResult",
    "PolicyClass",
    "PreferenceProfile",
    "SizeGuardExceeded",
    "WelfareReport",
    "classify_policy",
    "decide",
    "derive_rankings",
    "format_policy",
    "improve_allocation",
    "is_reachable",
    "load_instance",
    "make_instance",
    "optimize",
    "pad_to_multiple",
    "pareto_check_bruteforce",
    "parse_policy",
    "simulate",
    "synthesize_policy",
    "welfare",
]
