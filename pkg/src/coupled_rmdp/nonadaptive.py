"""Non-adaptive coupled uncertainty: Nature fixes one parameter realization,
deviating at most ``D`` states, before the process starts.

The general problem is NP-hard, so only desk-scale enumeration is offered for
it. When only rewards are uncertain the problem is a concave maximization over
the occupancy polytope and is solved exactly by cutting planes.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np
from scipy.optimize import linprog

from .dp import evaluate_policy_exact, occupancy_measure, solve_nominal_finite
from .errors import ConvergenceError, SizeCapError, UnsupportedInputError
from .model import MarkovPolicy, MdpModel, OccupancyMeasure, UncertaintySet

_HIGHS_OPTIONS = {"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10}


@dataclass(frozen=True)
class ScenarioAssignment:
    """States that deviate and the vertex each one takes; all others stay nominal."""

    deviations: Tuple[Tuple[int, int], ...] = ()

    def as_dict(self):
        return dict(self.deviations)

    def __len__(self):
        return len(self.deviations)

    def parameters(self, model: MdpModel, usets: UncertaintySet):
        """Full ``(p, r)`` arrays with the assigned vertices substituted."""
        p = model.nominal_p.copy()
        r = model.nominal_r.copy()
        for s, k in self.deviations:
            p[s] = usets.vertex_p[s][k]
            r[s] = usets.vertex_r[s][k]
        return p, r

    def rewards(self, usets: UncertaintySet):
        r = np.stack([vr[0] for vr in usets.vertex_r])
        for s, k in self.deviations:
            r[s] = usets.vertex_r[s][k]
        return r


def _require_reward_only(usets):
    if not usets.is_reward_only():
        raise UnsupportedInputError("reward-only solver got a vertex with non-nominal transitions")


def worst_case_value_reward_only(rho: OccupancyMeasure, usets: UncertaintySet, D: int):
    """Nature's best non-adaptive reply to a fixed occupancy, rewards only.

    For fixed ``rho`` the objective is linear in the rewards and separates over
    states, so Nature deviates the (at most) ``D`` states whose best vertex
    lowers the objective the most. Returns ``(value, assignment)``.
    """
    _require_reward_only(usets)
    visits = np.asarray(rho.rho).sum(axis=0)  # (S, A)
    nominal = 0.0
    gains = []
    for s in range(usets.num_states):
        base = float(visits[s] @ usets.vertex_r[s][0])
        nominal += base
        diffs = usets.vertex_r[s] @ visits[s] - base
        k = int(np.argmin(diffs))
        gains.append((min(float(diffs[k]), 0.0), s, k))
    chosen = [(g, s, k) for g, s, k in sorted(gains)[: int(D)] if g < 0]
    value = nominal + math.fsum(g for g, _, _ in chosen)
    return value, ScenarioAssignment(tuple(sorted((s, k) for _, s, k in chosen)))


@dataclass
class NonadaptiveSolution:
    occupancy: OccupancyMeasure
    value: float
    policy: MarkovPolicy
    assignment: ScenarioAssignment
    gap: float
    cuts: int
    upper_bounds: list = field(default_factory=list)
    lower_bounds: list = field(default_factory=list)


def _flow_constraints(model: MdpModel):
    """Equality system ``A_eq rho = b_eq`` of the occupancy polytope (rho flattened t, s, a)."""
    T, S, A = model.horizon, model.num_states, model.num_actions
    n = T * S * A
    A_eq = np.zeros((T * S, n + 1))
    b_eq = np.zeros(T * S)
    for s in range(S):
        A_eq[s, s * A:(s + 1) * A] = 1.0
        b_eq[s] = model.initial_dist[s]
    inflow = model.discount * model.nominal_p.reshape(S * A, S).T  # (S', S*A)
    for t in range(1, T):
        rows = slice(t * S, (t + 1) * S)
        for s in range(S):
            A_eq[t * S + s, (t * S + s) * A:(t * S + s + 1) * A] = 1.0
        A_eq[rows, (t - 1) * S * A:t * S * A] = -inflow
    return A_eq, b_eq


def solve_nonadaptive_reward_only(model: MdpModel, usets: UncertaintySet, D: int, tol: float = 1e-9,
                                  max_cuts: int = 10_000) -> NonadaptiveSolution:
    """Maximize the worst-case value over occupancy measures by cutting planes.

    The master LP maximizes an epigraph variable ``tau`` over the occupancy
    polytope subject to ``tau <= <r_j, rho>`` for every scenario ``j`` found
    so far; the separation oracle is :func:`worst_case_value_reward_only`.
    Stops when the master bound minus the best oracle value is ``<= tol``.

    The returned occupancy is recomputed from the extracted policy, so it is
    exactly feasible and ``value`` is attained by ``policy``.
    """
    _require_reward_only(usets)
    T = model.require_finite()
    S, A = model.num_states, model.num_actions
    n = T * S * A
    A_eq, b_eq = _flow_constraints(model)
    bounds = [(0, None)] * n + [(None, None)]
    c = np.zeros(n + 1)
    c[-1] = -1.0

    cut_rows = []
    seen = set()

    def add_cut(assignment):
        if assignment.deviations in seen:
            return False
        seen.add(assignment.deviations)
        row = np.zeros(n + 1)
        row[:n] = -np.broadcast_to(assignment.rewards(usets), (T, S, A)).ravel()
        row[-1] = 1.0
        cut_rows.append(row)
        return True

    start = occupancy_measure(model, solve_nominal_finite(model).policy)
    best_value, best_assignment = worst_case_value_reward_only(start, usets, D)
    best_rho = start.rho
    add_cut(ScenarioAssignment())
    add_cut(best_assignment)

    uppers, lowers = [], []
    gap = math.inf
    for _ in range(max_cuts):
        res = linprog(c, A_ub=np.array(cut_rows), b_ub=np.zeros(len(cut_rows)), A_eq=A_eq, b_eq=b_eq,
                      bounds=bounds, method="highs", options=_HIGHS_OPTIONS)
        if res.status != 0:
            raise ConvergenceError(f"master LP failed: {res.message}", gap)
        upper = -res.fun
        rho = OccupancyMeasure(np.maximum(res.x[:n], 0.0).reshape(T, S, A))
        value, assignment = worst_case_value_reward_only(rho, usets, D)
        if value > best_value:
            best_value, best_assignment, best_rho = value, assignment, rho.rho
        uppers.append(upper)
        lowers.append(best_value)
        gap = upper - best_value
        if gap <= tol or not add_cut(assignment):
            break
    else:
        raise ConvergenceError(f"cutting planes hit {max_cuts} cuts with gap {gap:.3e}", gap)

    policy = OccupancyMeasure(best_rho).to_policy()
    occ = occupancy_measure(model, policy)
    value, assignment = worst_case_value_reward_only(occ, usets, D)
    gap = max(uppers[-1] - value, 0.0)
    return NonadaptiveSolution(occ, value, policy, assignment, gap, len(cut_rows), uppers, lowers)


def _scenario_count(usets, D):
    extra = [usets.num_vertices(s) - 1 for s in range(usets.num_states)]
    total = 0
    for size in range(min(int(D), len(extra)) + 1):
        for subset in itertools.combinations(range(len(extra)), size):
            total += math.prod(extra[s] for s in subset)
    return total


def iter_assignments(usets: UncertaintySet, D: int):
    """Every :class:`ScenarioAssignment` with at most ``D`` deviating states."""
    S = usets.num_states
    for size in range(min(int(D), S) + 1):
        for subset in itertools.combinations(range(S), size):
            choices = [range(1, usets.num_vertices(s)) for s in subset]
            for ks in itertools.product(*choices):
                yield ScenarioAssignment(tuple(zip(subset, ks)))


def worst_case_fixed_policy(model: MdpModel, usets: UncertaintySet, D: int, policy: MarkovPolicy,
                            cap: int = 10**6):
    """Minimum of the exact policy value over all vertex assignments of at most ``D`` states.

    Transitions may deviate too. Because the value is not concave in the
    transition parameters, this is the worst case over vertex assignments,
    which is not guaranteed to be the worst case over the whole hull.
    Returns ``(value, assignment)``.
    """
    count = _scenario_count(usets, D)
    if count > cap:
        raise SizeCapError(f"{count} scenario assignments exceed the enumeration cap {cap}")
    best = None
    for assignment in iter_assignments(usets, D):
        value = evaluate_policy_exact(model, policy, *assignment.parameters(model, usets))
        if best is None or value < best[0]:
            best = (value, assignment)
    return best


def brute_force_nonadaptive_lower_bound(model: MdpModel, usets: UncertaintySet, D: int,
                                        policy_cap: int = 10**6, scenario_cap: int = 10**6):
    """Best deterministic Markov policy against its vertex-restricted worst case.

    A lower bound on the optimum over history-dependent randomized policies,
    which may do strictly better. Returns ``(value, policy)``.
    """
    T = model.require_finite()
    S, A = model.num_states, model.num_actions
    n_policies = A ** (S * T)
    if n_policies > policy_cap:
        raise SizeCapError(f"{n_policies} deterministic policies exceed the cap {policy_cap}")
    count = _scenario_count(usets, D)
    if count > scenario_cap:
        raise SizeCapError(f"{count} scenario assignments exceed the enumeration cap {scenario_cap}")
    scenarios = [a.parameters(model, usets) for a in iter_assignments(usets, D)]
    best = None
    for flat in itertools.product(range(A), repeat=S * T):
        policy = MarkovPolicy.from_actions(np.array(flat).reshape(T, S), A)
        value = min(evaluate_policy_exact(model, policy, p, r) for p, r in scenarios)
        if best is None or value > best[0]:
            best = (value, policy)
    return best
