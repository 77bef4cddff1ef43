"""Dual approximate-linear-programming planners for large MDPs.

The package optimizes policies parameterized through low-dimensional
occupancy-measure subspaces: projected stochastic subgradient descent on
penalized surrogates of the average-cost and discounted-cost dual linear
programs, a penalty-gain grid meta-algorithm, exact small-scale oracles for
verification, and a four-queue network benchmark.
"""

from .avgcost import (AvgSolverConfig, estimate_violations, exact_subgradient,
                      meta_solve_avg, project_theta_avg, sgd_solve_avg,
                      subgradient_estimate, surrogate_cost_exact, violations_exact)
from .discounted import (DiscSolverConfig, estimate_violations_disc,
                         exact_subgradient_disc, meta_solve_disc,
                         project_theta_disc, sgd_solve_disc,
                         subgradient_estimate_disc, surrogate_cost_exact_disc,
                         violations_exact_disc)
from .errors import (CapacityError, ConfigError, ConvergenceError, DualAlpError,
                     InputShapeError, ParameterError, SamplingSupportError)
from .features import (FeatureSpace, SamplingPair, make_norm_proportional_sampling,
                       make_uniform_sampling)
from .grid import PenaltyGrid, build_penalty_grid
from .mdp import (MdpModel, OptimalSolution, Policy, average_cost, bellman_average,
                  bellman_discounted, contraction_diagnostic, discounted_visits,
                  induced_chain, policy_from_occupancy, solve_optimal,
                  stationary_distribution, stationary_state_action, value_function)
from .queueing import (DESK_SPEC, PAPER_SPEC, QueueNetSpec, build_features,
                       build_mdp, decode_state, encode_state,
                       evaluate_policy_simulated, heuristic_policy, step)
from .trace import MetaResult, RunTrace, read_trace_csv

__version__ = "0.1.0"

__all__ = [
    "AvgSolverConfig", "DiscSolverConfig", "MdpModel", "Policy", "OptimalSolution",
    "FeatureSpace", "SamplingPair", "PenaltyGrid", "QueueNetSpec", "RunTrace",
    "MetaResult", "DESK_SPEC", "PAPER_SPEC",
    "average_cost", "bellman_average", "bellman_discounted", "build_features",
    "build_mdp", "build_penalty_grid", "contraction_diagnostic", "decode_state",
    "discounted_visits", "encode_state", "estimate_violations",
    "estimate_violations_disc", "evaluate_policy_simulated", "exact_subgradient",
    "exact_subgradient_disc", "heuristic_policy", "induced_chain",
    "make_norm_proportional_sampling", "make_uniform_sampling", "meta_solve_avg",
    "meta_solve_disc", "policy_from_occupancy", "project_theta_avg",
    "project_theta_disc", "read_trace_csv", "sgd_solve_avg", "sgd_solve_disc",
    "solve_optimal", "stationary_distribution", "stationary_state_action", "step",
    "subgradient_estimate", "subgradient_estimate_disc", "surrogate_cost_exact",
    "surrogate_cost_exact_disc", "value_function", "violations_exact",
    "violations_exact_disc",
    "DualAlpError", "InputShapeError", "ParameterError", "CapacityError",
    "ConvergenceError", "SamplingSupportError", "ConfigError",
]
