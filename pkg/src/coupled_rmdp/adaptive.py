"""Adaptive finite-horizon solver with a stage-deviation budget.

The decision maker observes each deviation after it happens, so the game is
solved by backward induction on the augmented state ``(s, d)`` where ``d`` is
Nature's remaining budget. At every stage Nature either keeps the nominal
parameters (budget unchanged) or moves to any vertex of ``U_s`` at the cost of
one unit of budget.

Stage indices are zero-based: ``t = 0`` is the first decision, ``values[T]``
is the terminal zero row.
"""

from __future__ import annotations

import math
from functools import lru_cache
from typing import NamedTuple, Optional, Union

import numpy as np

from .errors import SizeCapError, ValidationError
from .model import MarkovPolicy, MdpModel, UncertaintySet


class AdaptivePolicy:
    """Deterministic action table ``actions[t, s, d]``.

    Budgets above the stored maximum are clipped, since extra budget beyond the
    remaining number of stages is worthless.
    """

    def __init__(self, actions):
        actions = np.asarray(actions, dtype=int)
        actions.setflags(write=False)
        self.actions = actions

    @property
    def horizon(self) -> int:
        return self.actions.shape[0]

    @property
    def max_budget(self) -> int:
        return self.actions.shape[2] - 1

    def action(self, t, s, d):
        return self.actions[t, s, np.minimum(d, self.max_budget)]

    def __repr__(self):
        T, S, D1 = self.actions.shape
        return f"AdaptivePolicy(T={T}, S={S}, D={D1 - 1})"


class NatureResponse(NamedTuple):
    """Nature's equilibrium move for every ``(t, s, d, a)``.

    ``vertex`` is ``-1`` wherever ``deviate`` is false.
    """

    deviate: np.ndarray
    vertex: np.ndarray


class AdaptiveSolution(NamedTuple):
    values: np.ndarray  # (T + 1, S, Dc + 1), Dc = min(D, T)
    policy: AdaptivePolicy
    nature: NatureResponse

    @property
    def max_budget(self) -> int:
        return self.values.shape[2] - 1

    def value_at(self, t, s, d):
        return self.values[t, s, min(d, self.max_budget)]

    def value(self, initial_dist, budget: Optional[int] = None) -> float:
        d = self.max_budget if budget is None else min(budget, self.max_budget)
        return float(initial_dist @ self.values[0, :, d])


def q_value(s, d, a, p_s, r_s, next_table, discount=1.0) -> float:
    """``r_s[a] + discount * sum_s' p_s[a, s'] next_table[s', d]``.

    ``p_s`` has shape ``(A, S)``, ``r_s`` shape ``(A,)`` and ``next_table``
    shape ``(S, D + 1)`` (the completed stage ``t + 1`` table).
    """
    next_table = np.asarray(next_table, float)
    if not 0 <= d < next_table.shape[1]:
        raise ValueError(f"budget index {d} outside [0, {next_table.shape[1] - 1}]")
    p_row = np.asarray(p_s, float)[a]
    return float(np.asarray(r_s, float)[a] + discount * (p_row @ next_table[:, d]))


def _stage_q(model, P, R, v_next):
    """Nominal and per-vertex q tables for one stage.

    Returns ``q_nom[s, a, d]`` and ``q_vert[s, k, a, d]``, both evaluated at
    continuation budget ``d``.
    """
    g = model.discount
    q_nom = model.nominal_r[:, :, None] + g * np.einsum("saj,jd->sad", model.nominal_p, v_next)
    q_vert = R[:, :, :, None] + g * np.einsum("skaj,jd->skad", P, v_next)
    return q_nom, q_vert


def solve_adaptive_finite(model: MdpModel, usets: UncertaintySet, D: int) -> AdaptiveSolution:
    """Exact backward induction for the adaptive budgeted game.

    For ``d >= 1``::

        v_t(s, d) = max_a min( q(s, d, a, nominal), min_k q(s, d - 1, a, vertex k) )

    and for ``d = 0`` only the nominal branch. The budget axis is capped at
    ``min(D, T)``. Nature keeps the nominal parameters on ties and otherwise
    picks the lowest-index minimizing vertex; the decision maker picks the
    lowest-index maximizing action.
    """
    T = model.require_finite()
    if D < 0 or int(D) != D:
        raise ValidationError(f"budget D must be a nonnegative integer, got {D}")
    Dc = min(int(D), T)
    S, A = model.num_states, model.num_actions
    P, R = usets.padded()

    values = np.zeros((T + 1, S, Dc + 1))
    actions = np.zeros((T, S, Dc + 1), dtype=int)
    deviate = np.zeros((T, S, Dc + 1, A), dtype=bool)
    vertex = np.full((T, S, Dc + 1, A), -1, dtype=int)
    for t in range(T - 1, -1, -1):
        q_nom, q_vert = _stage_q(model, P, R, values[t + 1])
        q = q_nom.copy()
        if Dc >= 1:
            k_best = np.argmin(q_vert[..., :-1], axis=1)  # (S, A, Dc)
            q_dev = np.take_along_axis(q_vert[..., :-1], k_best[:, None], axis=1)[:, 0]
            dev = q_dev < q_nom[..., 1:]
            q[..., 1:] = np.where(dev, q_dev, q_nom[..., 1:])
            deviate[t, :, 1:, :] = dev.transpose(0, 2, 1)
            vertex[t, :, 1:, :] = np.where(dev, k_best, -1).transpose(0, 2, 1)
        best = np.argmax(q, axis=1)  # (S, Dc + 1)
        actions[t] = best
        values[t] = np.take_along_axis(q, best[:, None, :], axis=1)[:, 0, :]

    for arr in (values, deviate, vertex):
        arr.setflags(write=False)
    return AdaptiveSolution(values, AdaptivePolicy(actions), NatureResponse(deviate, vertex))


def nature_best_response(t, s, d, a, solution: AdaptiveSolution, model: MdpModel, usets: UncertaintySet):
    """Nature's move at ``(t, s, d, a)`` given the completed value tables.

    Returns ``(deviate, vertex)``; ``vertex`` is ``None`` when Nature keeps the
    nominal parameters, which it does if ``d == 0`` or the nominal q-value is
    ``<=`` the best deviating one.
    """
    d = min(d, solution.max_budget)
    if d == 0:
        return False, None
    v_next = solution.values[t + 1]
    g = model.discount
    q_nom = q_value(s, d, a, model.nominal_p[s], model.nominal_r[s], v_next, g)
    q_dev = [
        q_value(s, d - 1, a, usets.vertex_p[s][k], usets.vertex_r[s][k], v_next, g)
        for k in range(usets.num_vertices(s))
    ]
    k = int(np.argmin(q_dev))
    if q_nom <= q_dev[k]:
        return False, None
    return True, k


def brute_force_game_value(model: MdpModel, usets: UncertaintySet, D: int, cap: int = 256) -> float:
    """Game value by explicit recursion over the two-player game tree.

    Decision-maker nodes maximize over actions, Nature nodes minimize over the
    nominal option and (with budget left) every listed vertex, chance nodes
    average over successor states. Written with scalar Python loops, sharing
    no code with :func:`solve_adaptive_finite`, so it can serve as its oracle.
    Identical subtrees are memoized on ``(t, s, d)``.
    """
    T = model.require_finite()
    S, A = model.num_states, model.num_actions
    size = S * A * usets.max_vertices
    if size > cap:
        raise SizeCapError(f"game tree too large: |S|*|A|*K = {size} exceeds cap {cap}")
    g = model.discount
    p0 = model.nominal_p.tolist()
    r0 = model.nominal_r.tolist()
    vp = [v.tolist() for v in usets.vertex_p]
    vr = [v.tolist() for v in usets.vertex_r]

    def chance(t, p_row, reward, d):
        if t + 1 == T:
            return reward
        cont = 0.0
        for s2 in range(S):
            if p_row[s2] != 0.0:
                cont += p_row[s2] * decision(t + 1, s2, d)
        return reward + g * cont

    def nature(t, s, d, a):
        best = chance(t, p0[s][a], r0[s][a], d)
        if d >= 1:
            for k in range(len(vp[s])):
                best = min(best, chance(t, vp[s][k][a], vr[s][k][a], d - 1))
        return best

    @lru_cache(maxsize=None)
    def decision(t, s, d):
        return max(nature(t, s, d, a) for a in range(A))

    alpha = model.initial_dist.tolist()
    return math.fsum(alpha[s] * decision(0, s, int(D)) for s in range(S) if alpha[s] != 0.0)


def evaluate_strategies(model: MdpModel, usets: UncertaintySet, D: int, actions, deviate, vertex) -> float:
    """Exact game payoff of a fixed pair of deterministic adaptive strategies.

    ``actions[t, s, d]`` is the decision maker's table; ``deviate[t, s, d, a]``
    and ``vertex[t, s, d, a]`` describe Nature. Deviation requests at ``d = 0``
    are ignored (Nature has no budget).
    """
    T = model.require_finite()
    S = model.num_states
    g = model.discount
    v = np.zeros((S, D + 1))
    for t in range(T - 1, -1, -1):
        new = np.zeros_like(v)
        for s in range(S):
            for d in range(D + 1):
                a = actions[t, s, d]
                if d >= 1 and deviate[t, s, d, a]:
                    k = vertex[t, s, d, a]
                    new[s, d] = usets.vertex_r[s][k, a] + g * usets.vertex_p[s][k, a] @ v[:, d - 1]
                else:
                    new[s, d] = model.nominal_r[s, a] + g * model.nominal_p[s, a] @ v[:, d]
        v = new
    return float(model.initial_dist @ v[:, D])


def simulate_model(model: MdpModel, usets: UncertaintySet, policy: Union[AdaptivePolicy, MarkovPolicy],
                   p_deviate: float, d0: int, n_traj: int, seed: int, deviation_vertex: int = 1):
    """Monte Carlo rollouts where each stage deviates independently.

    With probability ``p_deviate`` a stage uses vertex ``deviation_vertex`` of
    the current state's set (when that state has one) instead of the nominal
    parameters. Rewards are the model's expected rewards. An adaptive policy
    reads the budget belief, which starts at ``d0`` and drops by one after each
    observed deviation, floored at zero.

    Trajectory ``i`` draws from its own stream seeded by ``(seed, i)``.
    Returns ``(mean, stderr)``.
    """
    T = model.require_finite()
    if n_traj < 1:
        raise ValidationError("n_traj must be at least 1")
    S, A = model.num_states, model.num_actions
    if policy.horizon != T:
        raise ValidationError(f"policy horizon {policy.horizon} != model horizon {T}")
    u = np.empty((n_traj, 4, T))
    for i in range(n_traj):
        u[i] = np.random.default_rng([seed, i]).random((4, T))
    has_dev = np.array([usets.num_vertices(s) > deviation_vertex for s in range(S)])
    P, R = usets.padded()
    kd = min(deviation_vertex, P.shape[1] - 1)

    cum_alpha = np.cumsum(model.initial_dist)
    s = np.minimum(np.searchsorted(cum_alpha, u[:, 0, 0], side="right"), S - 1)
    d = np.full(n_traj, d0)
    total = np.zeros(n_traj)
    weight = 1.0
    for t in range(T):
        if isinstance(policy, AdaptivePolicy):
            a = policy.action(t, s, d)
        else:
            cum_pi = np.cumsum(policy.probs[t, s], axis=1)
            a = np.minimum((u[:, 1, t][:, None] >= cum_pi).sum(axis=1), A - 1)
        dev = (u[:, 2, t] < p_deviate) & has_dev[s]
        reward = np.where(dev, R[s, kd, a], model.nominal_r[s, a])
        p_rows = np.where(dev[:, None], P[s, kd, a], model.nominal_p[s, a])
        total += weight * reward
        weight *= model.discount
        s = np.minimum((u[:, 3, t][:, None] >= np.cumsum(p_rows, axis=1)).sum(axis=1), S - 1)
        d = np.maximum(d - dev, 0)
    mean = math.fsum(total) / n_traj
    stderr = float(np.std(total, ddof=1) / np.sqrt(n_traj)) if n_traj > 1 else float("nan")
    return mean, stderr
