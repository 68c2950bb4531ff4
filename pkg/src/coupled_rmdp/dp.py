"""Classical and uncoupled-robust dynamic programming on the nominal model.

These are the baselines every budgeted solver must reduce to: zero budget
gives the nominal solution, a saturated budget gives the uncoupled
(rectangular) robust solution.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import ConvergenceError, ValidationError
from .model import MarkovPolicy, MdpModel, OccupancyMeasure, UncertaintySet


class FiniteSolution(NamedTuple):
    """Stage value table ``values[t, s]`` (``t = 0..T``, last row zero) and policy."""

    values: np.ndarray
    policy: MarkovPolicy

    def value(self, initial_dist) -> float:
        return float(initial_dist @ self.values[0])


class StationarySolution(NamedTuple):
    values: np.ndarray
    actions: np.ndarray
    residuals: list


def bellman_q(p, r, v, discount):
    """``r(s,a) + discount * sum_s' p(s'|s,a) v(s')`` for every ``(s, a)``."""
    return r + discount * (p @ v)


def solve_nominal_finite(model: MdpModel) -> FiniteSolution:
    """Backward induction on the nominal model.

    Ties in the action argmax go to the lowest action index.
    """
    T = model.require_finite()
    S, A = model.num_states, model.num_actions
    values = np.zeros((T + 1, S))
    actions = np.zeros((T, S), dtype=int)
    for t in range(T - 1, -1, -1):
        q = bellman_q(model.nominal_p, model.nominal_r, values[t + 1], model.discount)
        actions[t] = np.argmax(q, axis=1)
        values[t] = np.take_along_axis(q, actions[t][:, None], axis=1)[:, 0]
    return FiniteSolution(values, MarkovPolicy.from_actions(actions, A))


def _value_iteration(operator, v0, discount, tol, max_iter):
    v = v0
    residuals = []
    for _ in range(max_iter):
        v_new, greedy = operator(v)
        res = float(np.max(np.abs(v_new - v))) if v.size else 0.0
        residuals.append(res)
        v = v_new
        if res <= tol:
            return v, greedy, residuals
    raise ConvergenceError(
        f"value iteration did not reach residual {tol} in {max_iter} sweeps", residuals[-1]
    )


def solve_nominal_infinite(model: MdpModel, tol: float = 1e-10, max_iter: int = 1_000_000) -> StationarySolution:
    """Discounted value iteration; stops once the sup-norm residual is ``<= tol``.

    The returned values are within ``tol * discount / (1 - discount)`` of the
    true fixed point.
    """
    model.require_discounted()

    def operator(v):
        q = bellman_q(model.nominal_p, model.nominal_r, v, model.discount)
        a = np.argmax(q, axis=1)
        return q[np.arange(len(a)), a], a

    v, a, res = _value_iteration(operator, np.zeros(model.num_states), model.discount, tol, max_iter)
    return StationarySolution(v, a, res)


def robust_q(P, R, v, discount):
    """Worst-case ``q[s, a]`` over the padded vertex arrays, and the argmin vertex."""
    qk = R + discount * (P @ v)  # (S, K, A)
    k = np.argmin(qk, axis=1)
    return np.take_along_axis(qk, k[:, None, :], axis=1)[:, 0, :], k


def solve_robust_uncoupled_finite(model: MdpModel, usets: UncertaintySet) -> FiniteSolution:
    """Robust backward induction where Nature may pick any vertex at every stage."""
    T = model.require_finite()
    P, R = usets.padded()
    S, A = model.num_states, model.num_actions
    values = np.zeros((T + 1, S))
    actions = np.zeros((T, S), dtype=int)
    for t in range(T - 1, -1, -1):
        q, _ = robust_q(P, R, values[t + 1], model.discount)
        actions[t] = np.argmax(q, axis=1)
        values[t] = q[np.arange(S), actions[t]]
    return FiniteSolution(values, MarkovPolicy.from_actions(actions, A))


def solve_robust_uncoupled_infinite(model: MdpModel, usets: UncertaintySet, tol: float = 1e-10,
                                    max_iter: int = 1_000_000) -> StationarySolution:
    model.require_discounted()
    P, R = usets.padded()

    def operator(v):
        q, _ = robust_q(P, R, v, model.discount)
        a = np.argmax(q, axis=1)
        return q[np.arange(len(a)), a], a

    v, a, res = _value_iteration(operator, np.zeros(model.num_states), model.discount, tol, max_iter)
    return StationarySolution(v, a, res)


def _check_params(model, policy, p, r):
    S, A = model.num_states, model.num_actions
    T = model.require_finite()
    if policy.probs.shape != (T, S, A):
        raise ValidationError(f"policy shape {policy.probs.shape} does not match (T, S, A) = {(T, S, A)}")
    if np.shape(p) != (S, A, S) or np.shape(r) != (S, A):
        raise ValidationError(f"parameter shapes {np.shape(p)} / {np.shape(r)} do not match model")


def evaluate_policy_exact(model: MdpModel, policy: MarkovPolicy, p=None, r=None) -> float:
    """Expected discounted reward of ``policy`` under parameters ``(p, r)``.

    Computed by propagating the state distribution forward; no sampling.
    ``p`` and ``r`` default to the nominal parameters.
    """
    p = model.nominal_p if p is None else np.asarray(p, float)
    r = model.nominal_r if r is None else np.asarray(r, float)
    _check_params(model, policy, p, r)
    mu = model.initial_dist
    total = 0.0
    weight = 1.0
    for t in range(model.horizon):
        x = mu[:, None] * policy.probs[t]
        total += weight * float(np.sum(x * r))
        mu = np.einsum("sa,sak->k", x, p)
        weight *= model.discount
    return total


def occupancy_measure(model: MdpModel, policy: MarkovPolicy) -> OccupancyMeasure:
    """Discounted per-stage occupancy of ``policy`` under the nominal kernel."""
    _check_params(model, policy, model.nominal_p, model.nominal_r)
    T = model.horizon
    rho = np.zeros(policy.probs.shape)
    mass = model.initial_dist.copy()
    for t in range(T):
        rho[t] = mass[:, None] * policy.probs[t]
        mass = model.discount * np.einsum("sa,sak->k", rho[t], model.nominal_p)
    rho.setflags(write=False)
    return OccupancyMeasure(rho)
