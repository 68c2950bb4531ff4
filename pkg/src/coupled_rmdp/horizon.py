"""Budgeted solvers on the augmented ``(state, remaining budget)`` space.

* :func:`solve_setup_a` -- infinite horizon, at most ``D`` deviating stages.
* :func:`solve_setup_b` -- infinite horizon, deviations discounted by ``beta``.
* :func:`solve_continuous` -- fractional deviations priced by :func:`deviation_cost`.

For the discounted and continuous budgets the remaining budget is carried in
current-stage units, ``b_next = (b - cost) / beta``, which makes the recursion
stationary. It is stored on a uniform grid over ``[0, D_cap]`` with
``D_cap = min(D, 1 / (1 - beta))``: a budget of ``1 / (1 - beta)`` already pays
for a deviation at every remaining stage. Values between grid points are
linearly interpolated; the interpolation is monotone and non-expansive so the
Bellman operator stays a ``discount``-contraction.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ConvergenceError, NotInSetError, ValidationError
from .model import MdpModel, UncertaintySet

KINDS = ("discrete", "discounted", "continuous")


@dataclass(frozen=True)
class BudgetSpec:
    """Deviation budget: a count, a ``beta``-discounted count, or a continuous amount."""

    kind: str = "discrete"
    D: float = 0
    beta: float = 1.0
    budget_grid_points: int = 101
    magnitude_grid_points: int = 11

    def violations(self, discount: Optional[float] = None):
        out = []
        if self.kind not in KINDS:
            out.append(f"budget kind {self.kind!r} not one of {KINDS}")
        if self.D < 0:
            out.append(f"budget D must be nonnegative, got {self.D}")
        if self.kind == "discrete" and int(self.D) != self.D:
            out.append(f"discrete budget D must be an integer, got {self.D}")
        if self.kind != "discrete":
            if not self.beta <= 1.0 or (discount is not None and self.beta < discount):
                out.append(f"beta={self.beta} outside [discount, 1]")
            if self.budget_grid_points < 2 and self.D > 0:
                out.append("budget_grid_points must be at least 2")
        if self.kind == "continuous" and self.magnitude_grid_points < 2:
            out.append("magnitude_grid_points must be at least 2")
        return out

    def check(self, discount: Optional[float] = None):
        bad = self.violations(discount)
        if bad:
            raise ValidationError("invalid budget: " + "; ".join(bad), bad)

    @property
    def cap(self) -> float:
        if self.kind == "discrete" or self.beta >= 1.0:
            return float(self.D)
        return min(float(self.D), 1.0 / (1.0 - self.beta))

    def grid(self) -> np.ndarray:
        if self.kind == "discrete":
            return np.arange(int(self.D) + 1, dtype=float)
        if self.cap == 0.0:
            return np.zeros(1)
        return np.linspace(0.0, self.cap, self.budget_grid_points)


@dataclass
class BudgetedValueFunction:
    """``values[s, i]`` at budget ``grid[i]`` plus the greedy action table.

    For finite-horizon solves ``stage_values[t, s, i]`` and
    ``stage_actions[t, s, i]`` hold every stage and ``values`` is stage 0.
    """

    grid: np.ndarray
    values: np.ndarray
    actions: np.ndarray
    residuals: list = field(default_factory=list)
    stage_values: Optional[np.ndarray] = None
    stage_actions: Optional[np.ndarray] = None

    def at(self, s, b) -> float:
        """Interpolated value at state ``s`` and budget ``b`` (clamped to the grid)."""
        if len(self.grid) == 1:
            return float(self.values[s, 0])
        return float(np.interp(b, self.grid, self.values[s]))

    def value(self, initial_dist, budget=None) -> float:
        b = self.grid[-1] if budget is None else budget
        return float(sum(initial_dist[s] * self.at(s, b) for s in range(len(initial_dist))))


def _iterate(operator, v0, tol, max_iter):
    v = v0
    residuals = []
    for _ in range(max_iter):
        v_new, greedy = operator(v)
        res = float(np.max(np.abs(v_new - v)))
        residuals.append(res)
        v = v_new
        if res <= tol:
            return v, greedy, residuals
    raise ConvergenceError(f"value iteration stalled at residual {residuals[-1]:.3e} after {max_iter} sweeps",
                           residuals[-1])


def solve_setup_a(model: MdpModel, usets: UncertaintySet, D: int, tol: float = 1e-8,
                  max_iter: int = 1_000_000) -> BudgetedValueFunction:
    """Infinite-horizon value iteration with an undiscounted count of deviating stages.

    Fixed point of::

        V(s, d) = max_a min( r0 + g p0 V(., d),  min_k r_k + g p_k V(., d - 1) )

    with only the nominal branch at ``d = 0``. ``residuals`` records the
    sup-norm change of every sweep.
    """
    model.require_discounted()
    if D < 0 or int(D) != D:
        raise ValidationError(f"budget D must be a nonnegative integer, got {D}")
    D = int(D)
    g = model.discount
    P, R = usets.padded()
    p0, r0 = model.nominal_p, model.nominal_r
    S = model.num_states

    def operator(V):
        cont_nom = np.einsum("saj,jd->sad", p0, V)
        q = r0[:, :, None] + g * cont_nom
        if D >= 1:
            q_vert = R[:, :, :, None] + g * np.einsum("skaj,jd->skad", P, V[:, :-1])
            q[..., 1:] = np.minimum(q[..., 1:], q_vert.min(axis=1))
        a = np.argmax(q, axis=1)
        return np.take_along_axis(q, a[:, None, :], axis=1)[:, 0, :], a

    V, actions, residuals = _iterate(operator, np.zeros((S, D + 1)), tol, max_iter)
    return BudgetedValueFunction(np.arange(D + 1, dtype=float), V, actions, residuals)


def _interp_plan(grid, x):
    """Left index and weight so that ``V[:, lo] * (1 - w) + V[:, lo + 1] * w`` interpolates at ``x``.

    Points that land exactly on a grid node get weight 0 or 1, so integer
    grids reproduce the unrounded discrete recursion exactly.
    """
    if len(grid) == 1:
        return np.zeros(x.shape, dtype=int), np.zeros(x.shape)
    x = np.clip(x, grid[0], grid[-1])
    lo = np.clip(np.searchsorted(grid, x, side="right") - 1, 0, len(grid) - 2)
    w = (x - grid[lo]) / (grid[lo + 1] - grid[lo])
    return lo, w


def _interp(V, lo, w):
    if V.shape[1] == 1:
        return V[:, lo]
    return V[:, lo] * (1.0 - w) + V[:, lo + 1] * w


def _moves_setup_b(budget: BudgetSpec, grid):
    """Per grid point: magnitudes ``alpha[i, m]``, continuations ``x[i, m]``, validity mask."""
    cap, beta = budget.cap, budget.beta
    alpha = np.zeros((len(grid), 2))
    alpha[:, 1] = 1.0
    x = np.stack([np.minimum(grid / beta, cap), np.minimum((grid - 1.0) / beta, cap)], axis=1)
    valid = np.ones_like(x, dtype=bool)
    valid[:, 1] = grid >= 1.0 - 1e-12
    x[~valid] = 0.0
    return alpha, x, valid


def _moves_continuous(budget: BudgetSpec, grid):
    cap, beta = budget.cap, budget.beta
    steps = np.linspace(0.0, 1.0, budget.magnitude_grid_points)
    alpha = np.minimum(1.0, grid)[:, None] * steps[None, :]
    x = np.minimum((grid[:, None] - alpha) / beta, cap)
    x = np.maximum(x, 0.0)
    return alpha, x, np.ones_like(x, dtype=bool)


def _budgeted_operator(model, usets, grid, alpha, x, valid):
    """Bellman operator on ``V[s, i]`` where Nature chooses a vertex and a move ``m``.

    A move blends the nominal parameters with vertex ``k`` at magnitude
    ``alpha[i, m]`` and continues from budget ``x[i, m]``.
    """
    g = model.discount
    P, R = usets.padded()
    p0, r0 = model.nominal_p, model.nominal_r
    lo, w = _interp_plan(grid, x)
    a_ = alpha[None, None, None]  # broadcast against (S, K, A, I, M)
    blocked = ~valid[None, None, None]

    def operator(V):
        W = _interp(V, lo, w)  # (S', I, M)
        q_nom = r0[:, :, None, None] + g * np.einsum("saj,jim->saim", p0, W)
        q_vert = R[:, :, :, None, None] + g * np.einsum("skaj,jim->skaim", P, W)
        q = (1.0 - a_) * q_nom[:, None] + a_ * q_vert
        q = np.where(blocked, np.inf, q)
        q = q.min(axis=(1, 4))  # Nature: vertex and move
        act = np.argmax(q, axis=1)
        return np.take_along_axis(q, act[:, None, :], axis=1)[:, 0, :], act

    return operator


def _solve_budgeted(model, usets, budget, alpha, x, valid, tol, max_iter, horizon=None):
    grid = budget.grid()
    operator = _budgeted_operator(model, usets, grid, alpha, x, valid)
    S = model.num_states
    if horizon is None:
        model.require_discounted()
        V, actions, residuals = _iterate(operator, np.zeros((S, len(grid))), tol, max_iter)
        return BudgetedValueFunction(grid, V, actions, residuals)
    stage_values = np.zeros((horizon + 1, S, len(grid)))
    stage_actions = np.zeros((horizon, S, len(grid)), dtype=int)
    for t in range(horizon - 1, -1, -1):
        stage_values[t], stage_actions[t] = operator(stage_values[t + 1])
    return BudgetedValueFunction(grid, stage_values[0], stage_actions[0], [],
                                 stage_values, stage_actions)


def solve_setup_b(model: MdpModel, usets: UncertaintySet, budget: BudgetSpec, tol: float = 1e-8,
                  max_iter: int = 1_000_000) -> BudgetedValueFunction:
    """Infinite horizon with discounted deviation count ``sum beta^t 1{deviate} <= D``.

    Deviating costs one unit of (current-stage) budget and is only allowed
    while at least one unit remains.
    """
    model.require_discounted()
    budget.check(model.discount)
    grid = budget.grid()
    alpha, x, valid = _moves_setup_b(budget, grid)
    return _solve_budgeted(model, usets, budget, alpha, x, valid, tol, max_iter)


def solve_continuous(model: MdpModel, usets: UncertaintySet, budget: BudgetSpec, tol: float = 1e-8,
                     horizon: Optional[int] = None, max_iter: int = 1_000_000) -> BudgetedValueFunction:
    """Fractional deviations with cost equal to the blend magnitude.

    Nature picks a vertex ``k`` and a magnitude on a uniform grid of
    ``magnitude_grid_points`` values in ``[0, min(1, b)]``; the realized
    parameters are ``(1 - m) * nominal + m * vertex_k`` and the budget moves to
    ``min((b - m) / beta, D_cap)``. ``horizon=None`` runs value iteration to
    ``tol``; an integer horizon runs that many backward-induction stages
    (``discount = 1`` is then allowed).
    """
    if horizon is None:
        model.require_discounted()
    budget.check(model.discount if horizon is None else None)
    grid = budget.grid()
    alpha, x, valid = _moves_continuous(budget, grid)
    return _solve_budgeted(model, usets, budget, alpha, x, valid, tol, max_iter, horizon=horizon)


def deviation_cost(p, r, state_index: int, usets: UncertaintySet, tol: float = 1e-9) -> float:
    """Budget consumed by realizing ``(p, r)`` at a state.

    The cost is the smallest ``alpha`` with ``(p, r) = (1 - alpha) * nominal +
    alpha * vertex_k`` over the state's non-nominal vertices. For a segment
    this is the exact minimal scaling; for larger hulls it is an upper bound
    on it (points strictly inside the hull may be cheaper along other rays).
    """
    vp = usets.vertex_p[state_index]
    vr = usets.vertex_r[state_index]
    nominal = np.concatenate([vp[0].ravel(), vr[0].ravel()])
    target = np.concatenate([np.asarray(p, float).ravel(), np.asarray(r, float).ravel()])
    if target.shape != nominal.shape:
        raise ValidationError(f"parameter size {target.size} does not match the state's {nominal.size}")
    offset = target - nominal
    if np.max(np.abs(offset)) <= tol:
        return 0.0
    best = None
    for k in range(1, vp.shape[0]):
        direction = np.concatenate([vp[k].ravel(), vr[k].ravel()]) - nominal
        norm2 = float(direction @ direction)
        if norm2 == 0.0:
            continue
        a = float(offset @ direction) / norm2
        if -tol <= a <= 1.0 + tol and np.max(np.abs(offset - a * direction)) <= tol:
            a = min(max(a, 0.0), 1.0)
            best = a if best is None else min(best, a)
    if best is None:
        raise NotInSetError(f"parameters are not a nominal-vertex blend at state {state_index}")
    return best
