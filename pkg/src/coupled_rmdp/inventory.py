"""Single-product stochastic inventory control with a *Rush* deviation.

State: stock on hand at the start of a day, before ordering. Action: order
quantity ``u``; orders beyond capacity are filled only up to ``max_stock``
(and only the delivered items are paid for), so every action is available in
every state. Delivery is immediate, then demand arrives. Holding cost is
charged on everything in the store that day, unmet customers are fined, and
leftover stock after the last day is worthless.

Nominal days have Poisson demand; on a Rush day exactly ``max_stock``
customers arrive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence, Union

import numpy as np
from scipy import stats

from .adaptive import AdaptivePolicy, solve_adaptive_finite
from .dp import solve_nominal_finite
from .errors import ValidationError
from .model import MarkovPolicy, MdpModel, UncertaintySet


@dataclass(frozen=True)
class InventoryParams:
    T: int = 100
    max_stock: int = 20
    store_price: float = 5.0
    customer_price: float = 50.0
    num_customers: float = 10.0
    holding_cost_coeff: float = 2.0
    penalty_coeff: float = 7.0
    initial_stock: int = 0
    demand_cutoff_mass: float = 1e-12

    def __post_init__(self):
        for name in ("T", "max_stock", "store_price", "customer_price", "num_customers",
                     "holding_cost_coeff", "penalty_coeff", "initial_stock", "demand_cutoff_mass"):
            if getattr(self, name) < 0:
                raise ValidationError(f"inventory parameter {name} must be nonnegative")
        if self.T < 1:
            raise ValidationError("T must be at least 1")
        if self.initial_stock > self.max_stock:
            raise ValidationError("initial_stock exceeds max_stock")
        if not 0 < self.demand_cutoff_mass < 1:
            raise ValidationError("demand_cutoff_mass must lie in (0, 1)")


@dataclass(frozen=True)
class SimulationReport:
    policy: str
    d0: Optional[int]
    p_rush: float
    mean: float
    stderr: float
    n: int
    seed: int


def demand_pmf(params: InventoryParams) -> np.ndarray:
    """Truncated Poisson pmf; the tail beyond the last kept value is lumped onto it."""
    lam = params.num_customers
    d_max = int(stats.poisson.ppf(1.0 - params.demand_cutoff_mass, lam))
    while stats.poisson.sf(d_max, lam) >= params.demand_cutoff_mass:
        d_max += 1
    pmf = stats.poisson.pmf(np.arange(d_max + 1), lam)
    pmf[-1] += stats.poisson.sf(d_max, lam)
    return pmf


def day_reward(params: InventoryParams, order, stock_after_order, demand):
    """Realized one-day reward (vectorized over arrays)."""
    y = stock_after_order
    sold = np.minimum(demand, y)
    unmet = np.maximum(demand - y, 0)
    return (params.customer_price * sold - params.store_price * order
            - params.holding_cost_coeff * y ** 2 - params.penalty_coeff * unmet ** 2)


def _delivered(params, s, u):
    return np.minimum(u, params.max_stock - s)


def build_inventory_mdp(params: InventoryParams):
    """Expected-reward MDP and the two-vertex ``{nominal, Rush}`` uncertainty sets."""
    M = params.max_stock
    S = A = M + 1
    pmf = demand_pmf(params)
    demand = np.arange(len(pmf))
    p = np.zeros((S, A, S))
    r = np.zeros((S, A))
    p_rush = np.zeros((S, A, S))
    r_rush = np.zeros((S, A))
    for s in range(S):
        for u in range(A):
            q = int(_delivered(params, s, u))
            y = s + q
            r[s, u] = float(pmf @ day_reward(params, q, y, demand))
            # next stock is y - d while d < y, and 0 once demand reaches y
            for d in range(min(y, len(pmf))):
                p[s, u, y - d] = pmf[d]
            p[s, u, 0] = pmf[y:].sum()
            r_rush[s, u] = float(day_reward(params, q, y, M))
            p_rush[s, u, 0] = 1.0
    alpha = np.zeros(S)
    alpha[params.initial_stock] = 1.0
    model = MdpModel(p, r, alpha, horizon=params.T, discount=1.0)
    usets = UncertaintySet.from_deviations(model, [[(p_rush[s], r_rush[s])] for s in range(S)])
    return model, usets


def rush_aware_policy(params: InventoryParams, p_rush: float) -> MarkovPolicy:
    """Optimal policy of the MDP whose daily dynamics mix nominal and Rush days.

    The policy knows ``p_rush`` but not which days will be Rush days.
    """
    if not 0.0 <= p_rush <= 1.0:
        raise ValidationError(f"p_rush must lie in [0, 1], got {p_rush}")
    model, usets = build_inventory_mdp(params)
    mixed = mixture_model(model, usets, p_rush)
    return solve_nominal_finite(mixed).policy


def mixture_model(model: MdpModel, usets: UncertaintySet, p_rush: float) -> MdpModel:
    p_dev = np.stack([vp[1] for vp in usets.vertex_p])
    r_dev = np.stack([vr[1] for vr in usets.vertex_r])
    return MdpModel((1 - p_rush) * model.nominal_p + p_rush * p_dev,
                    (1 - p_rush) * model.nominal_r + p_rush * r_dev,
                    model.initial_dist, horizon=model.horizon, discount=model.discount)


@lru_cache(maxsize=8)
def _draws(params: InventoryParams, n_traj: int, seed: int):
    """Per-trajectory random streams: Rush uniforms, Poisson demands, action uniforms."""
    d_max = len(demand_pmf(params)) - 1
    rush_u = np.empty((n_traj, params.T))
    demand = np.empty((n_traj, params.T), dtype=np.int64)
    act_u = np.empty((n_traj, params.T))
    for i in range(n_traj):
        rng = np.random.default_rng([seed, i])
        rush_u[i] = rng.random(params.T)
        demand[i] = rng.poisson(params.num_customers, params.T)
        act_u[i] = rng.random(params.T)
    np.minimum(demand, d_max, out=demand)
    for arr in (rush_u, demand, act_u):
        arr.setflags(write=False)
    return rush_u, demand, act_u


def simulate(params: InventoryParams, policy: Union[AdaptivePolicy, MarkovPolicy], d0: int, p_rush: float,
             n_traj: int, seed: int, label: str = "budgeted") -> SimulationReport:
    """Monte Carlo estimate of the realized total reward of ``policy``.

    Each day is a Rush day independently with probability ``p_rush``. An
    adaptive policy reads its remaining-budget belief, which starts at ``d0``
    and drops by one after every Rush day (never below zero). Trajectory ``i``
    uses the stream seeded by ``(seed, i)``, and the streams do not depend on
    the policy, so different policies are compared on common random numbers.
    """
    if n_traj < 1:
        raise ValidationError("n_traj must be at least 1")
    S = params.max_stock + 1
    expected = (params.T, S)
    if isinstance(policy, AdaptivePolicy):
        shape = policy.actions.shape[:2]
    else:
        shape = policy.probs.shape[:2]
    if shape != expected:
        raise ValidationError(f"policy covers (T, S) = {shape}, inventory needs {expected}")

    rush_u, demand, act_u = _draws(params, n_traj, seed)
    s = np.full(n_traj, params.initial_stock)
    d = np.full(n_traj, d0)
    total = np.zeros(n_traj)
    for t in range(params.T):
        if isinstance(policy, AdaptivePolicy):
            u = policy.action(t, s, d)
        elif policy.deterministic:
            u = policy.actions[t, s]
        else:
            cum = np.cumsum(policy.probs[t, s], axis=1)
            u = np.minimum((act_u[:, t, None] >= cum).sum(axis=1), S - 1)
        q = _delivered(params, s, u)
        y = s + q
        rush = rush_u[:, t] < p_rush
        dem = np.where(rush, params.max_stock, demand[:, t])
        total += day_reward(params, q, y, dem)
        s = np.maximum(y - dem, 0)
        d = np.maximum(d - rush, 0)
    mean = math.fsum(total) / n_traj
    stderr = float(np.std(total, ddof=1) / math.sqrt(n_traj)) if n_traj > 1 else 0.0
    return SimulationReport(label, d0, float(p_rush), mean, stderr, n_traj, seed)


def figure3_experiment(params: InventoryParams, p_rush_list: Sequence[float], d0_list: Sequence[int],
                       n_traj: int, seed: int, include_aware: bool = True):
    """Simulate the budgeted policy for every ``d0`` against every ``p_rush``.

    One adaptive solve per ``d0``; ``d0 = 0`` is the nominal policy and
    ``d0 = T`` the uncoupled robust one. With ``include_aware`` a row for the
    Rush-aware mixture policy is added per ``p_rush`` (``d0 = None``).
    """
    model, usets = build_inventory_mdp(params)
    rows = []
    for d0 in d0_list:
        policy = solve_adaptive_finite(model, usets, int(d0)).policy
        for p in p_rush_list:
            rows.append(simulate(params, policy, int(d0), p, n_traj, seed))
    if include_aware:
        for p in p_rush_list:
            rows.append(simulate(params, rush_aware_policy(params, p), 0, p, n_traj, seed, label="aware"))
    return rows
