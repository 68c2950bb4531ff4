"""Infinite-horizon budgets: a plain count, a discounted count and fractional deviations."""

import numpy as np

from coupled_rmdp import (BudgetSpec, solve_continuous, solve_nominal_infinite, solve_robust_uncoupled_infinite,
                          solve_setup_a, solve_setup_b)
from coupled_rmdp.generators import random_model, random_uncertainty

rng = np.random.default_rng(11)
model = random_model(rng, 5, 3, horizon=None, discount=0.9)
usets = random_uncertainty(rng, model, max_vertices=3)
alpha = model.initial_dist

print(f"nominal  {solve_nominal_infinite(model).values @ alpha:8.4f}")
print(f"robust   {solve_robust_uncoupled_infinite(model, usets).values @ alpha:8.4f}\n")

a = solve_setup_a(model, usets, 3)
print("counted deviations, V(d) for d = 0..3:", np.round(alpha @ a.values, 4))
print(f"  {len(a.residuals)} sweeps, last residual {a.residuals[-1]:.1e}")

for beta in (1.0, 0.95):
    b = solve_setup_b(model, usets, BudgetSpec("discounted", 3, beta, budget_grid_points=31))
    print(f"discounted count, beta={beta}: V(budget 3) = {b.value(alpha, 3.0):.4f}")

# fractional deviations; nested magnitude grids can only lower the value
for nm in (2, 3, 5, 9):
    c = solve_continuous(model, usets, BudgetSpec("continuous", 1.5, 1.0, 13, nm))
    print(f"continuous, {nm} magnitudes: V(1.5) = {c.value(alpha, 1.5):.4f}")
