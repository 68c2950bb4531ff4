"""Shop inventory with occasional Rush days.

A Rush day brings as many customers as the store can hold. The sweep
compares the budgeted policy for several initial budgets d0 (d0 = 0 is the
nominal policy, d0 = T the fully robust one) and the policy that knows the
Rush probability, on the same simulated demand streams.

Pass a smaller trajectory count as the first argument for a quick run.
"""

import math
import sys

from coupled_rmdp.inventory import InventoryParams, figure3_experiment

n_traj = int(sys.argv[1]) if len(sys.argv) > 1 else 10_000
params = InventoryParams()
p_list = [0.0, 0.01, 0.02, 0.05, 0.1, 0.2]
d0_list = [0, 1, 2, 5, 10, params.T]

rows = figure3_experiment(params, p_list, d0_list, n_traj, seed=2012)
table = {(r.policy, r.d0, r.p_rush): r for r in rows}

print("mean total reward over", params.T, "days,", n_traj, "trajectories\n")
print("p_rush   " + "".join(f"d0={d:<7d}" for d in d0_list) + "aware")
for p in p_list:
    cells = [table[("budgeted", d, p)].mean for d in d0_list] + [table[("aware", 0, p)].mean]
    print(f"{p:<8} " + "".join(f"{c:<10.0f}" for c in cells))

print("\nd0 = ceil(T p) against the nominal policy:")
for p in p_list[1:]:
    d = math.ceil(params.T * p)
    if d not in d0_list:
        continue
    a, b = table[("budgeted", d, p)], table[("budgeted", 0, p)]
    print(f"  p={p}: d0={d} {a.mean:.0f} vs {b.mean:.0f} (diff {a.mean - b.mean:+.0f}, "
          f"se {math.hypot(a.stderr, b.stderr):.0f})")
