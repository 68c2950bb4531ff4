"""Robust MDPs with coupled uncertainty.

Nature may move the model parameters away from their nominal values, but
only within a shared deviation budget: a number of deviating states
(non-adaptive), a number of deviating stages (adaptive), a discounted count,
or a continuous amount. The solvers compute optimal max-min policies for each
variant; zero budget recovers the nominal MDP and a saturated budget the
classical uncoupled robust MDP.
"""

from .adaptive import (AdaptivePolicy, AdaptiveSolution, NatureResponse, brute_force_game_value,
                       evaluate_strategies, nature_best_response, q_value, simulate_model,
                       solve_adaptive_finite)
from .budget import DeviationRates, budget_bound, empirical_coverage_check, integer_budget
from .dp import (evaluate_policy_exact, occupancy_measure, solve_nominal_finite, solve_nominal_infinite,
                 solve_robust_uncoupled_finite, solve_robust_uncoupled_infinite)
from .errors import (ConvergenceError, CoupledMDPError, NotInSetError, SizeCapError, UnsupportedInputError,
                     ValidationError)
from .horizon import (BudgetedValueFunction, BudgetSpec, deviation_cost, solve_continuous, solve_setup_a,
                      solve_setup_b)
from .model import MarkovPolicy, MdpModel, OccupancyMeasure, UncertaintySet, check_model, validate_model
from .nonadaptive import (ScenarioAssignment, brute_force_nonadaptive_lower_bound,
                          solve_nonadaptive_reward_only, worst_case_fixed_policy,
                          worst_case_value_reward_only)

__version__ = "0.1.0"
