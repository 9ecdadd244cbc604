"""Assortment-and-position optimization and learning under the MNL choice model."""

from .estimation import (
    ConfidenceParams,
    PairwiseStats,
    confidence_params,
    solve_clipped_mle,
    ucb_general,
    ucb_multiplicative,
)
from .expedia import ExtractedParams, build_instance, extract_parameters, load_impressions
from .harness import RegretTable, RegretTrace, SimConfig, oracle_optimum, run_replications, run_simulation
from .instances import example_instance, hard_instance, random_instance
from .model import (
    EMPTY,
    GENERAL,
    MULTIPLICATIVE,
    OUTSIDE,
    Instance,
    InstanceError,
    Placement,
    choice_distribution,
    expected_revenue,
    load_instance,
    sample_choice,
)
from .optimize import ConvergenceError, OptimizationResult, brute_force_optimize, dinkelbach_optimize
from .policies import EP2MLEUCB, GP2UCB, P2MLEUCB, EpochUCB, Policy, estimate_theta, make_policy

__version__ = "0.1.0"
