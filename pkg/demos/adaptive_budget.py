"""Adaptive budgeted game on a small random model.

Nature may deviate at most D stages along the trajectory and the decision
maker sees each deviation after the fact. Sweeping D from 0 to T moves the
value from the nominal optimum down to the classical robust value.
"""

import numpy as np

from coupled_rmdp import (brute_force_game_value, solve_adaptive_finite, solve_nominal_finite,
                          solve_robust_uncoupled_finite)
from coupled_rmdp.generators import random_model, random_uncertainty

rng = np.random.default_rng(7)
model = random_model(rng, 4, 3, horizon=6)
usets = random_uncertainty(rng, model, max_vertices=3)
alpha = model.initial_dist

nominal = solve_nominal_finite(model).value(alpha)
robust = solve_robust_uncoupled_finite(model, usets).value(alpha)
print(f"nominal value           {nominal:9.4f}")
print(f"uncoupled robust value  {robust:9.4f}\n")

print(" D   budgeted value   game tree")
for D in range(model.horizon + 1):
    sol = solve_adaptive_finite(model, usets, D)
    print(f"{D:2d}   {sol.value(alpha):14.4f}   {brute_force_game_value(model, usets, D):9.4f}")

# the first stage of the D = 2 policy, per state and remaining budget
sol = solve_adaptive_finite(model, usets, 2)
print("\nstage-0 actions (rows: state, cols: remaining budget 0..2)")
print(sol.policy.actions[0])
print("stage-0 Nature vertex under those actions (-1: stays nominal)")
for s in range(model.num_states):
    moves = [int(sol.nature.vertex[0, s, d, sol.policy.actions[0, s, d]]) for d in range(3)]
    print(f"  s={s}: {moves}")
