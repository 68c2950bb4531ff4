"""Choosing D from per-stage deviation probabilities.

If each of n stages deviates independently with probability a_i, the count
stays below the bound with probability at least 1 - delta. The simulation
shows how conservative the bound is.
"""

import numpy as np

from coupled_rmdp import DeviationRates, budget_bound, empirical_coverage_check, integer_budget

for n, a, delta in [(100, 0.01, 0.05), (100, 0.05, 0.05), (50, 0.2, 0.01), (1000, 0.001, 0.1)]:
    rates = DeviationRates(np.full(n, a), delta)
    D = integer_budget(rates)
    cover = empirical_coverage_check(rates, D, trials=100_000, seed=1)
    tight = next(k for k in range(n + 1) if empirical_coverage_check(rates, k, trials=100_000, seed=1) >= 1 - delta)
    print(f"n={n:5d} a={a:<6} delta={delta:<5} bound {budget_bound(rates):7.3f} -> D={D:3d} "
          f"coverage {cover:.4f}  (smallest D reaching 1-delta in simulation: {tight})")
