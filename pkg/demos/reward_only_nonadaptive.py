"""Non-adaptive coupling with uncertain rewards only.

Nature commits up front to the (at most D) states whose rewards it lowers.
The optimal policy can be randomized: in this toy each deviation ruins one
of two equivalent actions, so mixing 50/50 is the only hedge.
"""

import numpy as np

from coupled_rmdp import (MdpModel, UncertaintySet, brute_force_nonadaptive_lower_bound,
                          solve_nonadaptive_reward_only, solve_robust_uncoupled_finite)
from coupled_rmdp.generators import random_model, random_uncertainty

model = MdpModel([[[1.0], [1.0]]], [[1.0, 1.0]], [1.0], horizon=1)
usets = UncertaintySet.from_deviations(model, [[([[1.0], [1.0]], [1.0, 0.0]), ([[1.0], [1.0]], [0.0, 1.0])]])
sol = solve_nonadaptive_reward_only(model, usets, 1)
det, _ = brute_force_nonadaptive_lower_bound(model, usets, 1)
print(f"hedging toy: randomized {sol.value:.3f}, best deterministic {det:.3f}, "
      f"uncoupled {solve_robust_uncoupled_finite(model, usets).value(model.initial_dist):.3f}")
print("policy:", sol.policy.probs[0, 0])

rng = np.random.default_rng(3)
model = random_model(rng, 6, 3, horizon=8)
usets = random_uncertainty(rng, model, 3, reward_only=True)
print("\nrandom 6-state model, T = 8")
print(" D    value      cuts   gap")
for D in range(model.num_states + 1):
    sol = solve_nonadaptive_reward_only(model, usets, D)
    print(f"{D:2d}  {sol.value:9.4f}  {sol.cuts:5d}  {sol.gap:.1e}   deviating {sol.assignment.as_dict()}")
