"""Finite MDP data types: nominal model, per-state vertex uncertainty sets,
Markov policies and occupancy measures.

Array conventions used throughout the package::

    p[s, a, s']        transition kernel, shape (S, A, S)
    r[s, a]            expected one-step reward, shape (S, A)
    policy.probs[t, s, a]   per-stage action distribution, shape (T, S, A)
    rho[t, s, a]       discounted occupancy, shape (T, S, A)
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import UnsupportedInputError, ValidationError

#: Tolerance for "is a probability distribution" checks.
DIST_TOL = 1e-9


@dataclass(frozen=True)
class MdpModel:
    """Nominal finite MDP.

    ``horizon`` is a positive integer, or ``None`` for the infinite-horizon
    discounted criterion (which then requires ``discount < 1``).
    """

    nominal_p: np.ndarray
    nominal_r: np.ndarray
    initial_dist: np.ndarray
    horizon: Optional[int] = None
    discount: float = 1.0

    def __post_init__(self):
        p = np.array(self.nominal_p, dtype=float)
        r = np.array(self.nominal_r, dtype=float)
        alpha = np.array(self.initial_dist, dtype=float)
        if p.ndim != 3 or p.shape[0] != p.shape[2]:
            raise ValidationError(f"nominal_p must have shape (S, A, S), got {p.shape}")
        if r.shape != p.shape[:2]:
            raise ValidationError(f"nominal_r must have shape {p.shape[:2]}, got {r.shape}")
        if alpha.shape != (p.shape[0],):
            raise ValidationError(f"initial_dist must have shape ({p.shape[0]},), got {alpha.shape}")
        for arr in (p, r, alpha):
            arr.setflags(write=False)
        object.__setattr__(self, "nominal_p", p)
        object.__setattr__(self, "nominal_r", r)
        object.__setattr__(self, "initial_dist", alpha)
        object.__setattr__(self, "discount", float(self.discount))
        if self.horizon is not None:
            object.__setattr__(self, "horizon", int(self.horizon))

    @property
    def num_states(self) -> int:
        return self.nominal_p.shape[0]

    @property
    def num_actions(self) -> int:
        return self.nominal_p.shape[1]

    @property
    def finite(self) -> bool:
        return self.horizon is not None

    def with_horizon(self, horizon: Optional[int], discount: Optional[float] = None) -> "MdpModel":
        return MdpModel(
            self.nominal_p,
            self.nominal_r,
            self.initial_dist,
            horizon=horizon,
            discount=self.discount if discount is None else discount,
        )

    def require_finite(self) -> int:
        if self.horizon is None:
            raise UnsupportedInputError("solver requires a finite horizon")
        return self.horizon

    def require_discounted(self):
        if not self.discount < 1.0:
            raise UnsupportedInputError(
                f"infinite-horizon solver requires discount < 1, got {self.discount}"
            )


@dataclass(frozen=True)
class UncertaintySet:
    """Per-state vertex lists of admissible ``(p_s, r_s)`` parameters.

    ``vertex_p[s]`` has shape ``(K_s, A, S)`` and ``vertex_r[s]`` has shape
    ``(K_s, A)``. Vertex 0 of every state is the nominal parameter. The convex
    hull of the list is the uncertainty set; every solver here minimizes a
    linear functional over it, so the vertices are all that is needed.
    """

    vertex_p: tuple
    vertex_r: tuple
    _padded: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        if len(self.vertex_p) != len(self.vertex_r):
            raise ValidationError("vertex_p and vertex_r must cover the same states")
        ps, rs = [], []
        for s, (vp, vr) in enumerate(zip(self.vertex_p, self.vertex_r)):
            vp = np.array(vp, dtype=float)
            vr = np.array(vr, dtype=float)
            if vp.ndim != 3 or vr.ndim != 2 or vp.shape[0] != vr.shape[0] or vp.shape[:2] != vr.shape:
                raise ValidationError(
                    f"state {s}: vertex arrays have inconsistent shapes {vp.shape} / {vr.shape}"
                )
            if vp.shape[0] == 0:
                raise ValidationError(f"state {s}: vertex list is empty")
            vp.setflags(write=False)
            vr.setflags(write=False)
            ps.append(vp)
            rs.append(vr)
        object.__setattr__(self, "vertex_p", tuple(ps))
        object.__setattr__(self, "vertex_r", tuple(rs))

    @classmethod
    def singleton(cls, model: MdpModel) -> "UncertaintySet":
        """Nominal-only sets (no uncertainty)."""
        return cls(
            tuple(model.nominal_p[s][None] for s in range(model.num_states)),
            tuple(model.nominal_r[s][None] for s in range(model.num_states)),
        )

    @classmethod
    def from_deviations(cls, model: MdpModel, deviations: Sequence) -> "UncertaintySet":
        """Build sets from per-state lists of non-nominal ``(p_s, r_s)`` vertices.

        The nominal parameters are prepended as vertex 0.
        """
        vps, vrs = [], []
        for s in range(model.num_states):
            extra = list(deviations[s]) if deviations[s] is not None else []
            vps.append(np.stack([model.nominal_p[s]] + [np.asarray(p, float) for p, _ in extra]))
            vrs.append(np.stack([model.nominal_r[s]] + [np.asarray(r, float) for _, r in extra]))
        return cls(tuple(vps), tuple(vrs))

    @property
    def num_states(self) -> int:
        return len(self.vertex_p)

    def num_vertices(self, s: int) -> int:
        return self.vertex_p[s].shape[0]

    @property
    def max_vertices(self) -> int:
        return max(vp.shape[0] for vp in self.vertex_p)

    def is_reward_only(self) -> bool:
        return all(np.array_equal(vp, np.broadcast_to(vp[0], vp.shape)) for vp in self.vertex_p)

    def padded(self):
        """Dense ``(P, R)`` with shapes ``(S, K, A, S)`` and ``(S, K, A)``.

        States with fewer than ``K = max_vertices`` vertices are padded with
        copies of their nominal vertex, which leaves every minimum over the
        set unchanged and, with lowest-index tie-breaking, never changes an
        argmin either.
        """
        if "pr" not in self._padded:
            k = self.max_vertices
            P = np.stack([
                np.concatenate([vp, np.repeat(vp[:1], k - vp.shape[0], axis=0)]) for vp in self.vertex_p
            ])
            R = np.stack([
                np.concatenate([vr, np.repeat(vr[:1], k - vr.shape[0], axis=0)]) for vr in self.vertex_r
            ])
            P.setflags(write=False)
            R.setflags(write=False)
            self._padded["pr"] = (P, R)
        return self._padded["pr"]

    def with_extra_vertex(self, s: int, p_s, r_s) -> "UncertaintySet":
        vps = list(self.vertex_p)
        vrs = list(self.vertex_r)
        vps[s] = np.concatenate([vps[s], np.asarray(p_s, float)[None]])
        vrs[s] = np.concatenate([vrs[s], np.asarray(r_s, float)[None]])
        return UncertaintySet(tuple(vps), tuple(vrs))


class MarkovPolicy:
    """Per-stage randomized Markov policy ``probs[t, s, a]``.

    Deterministic policies are stored the same way (one-hot rows); the
    ``actions`` attribute is kept when the policy was built from an action table.
    """

    def __init__(self, probs, actions=None):
        probs = np.array(probs, dtype=float)
        if probs.ndim != 3:
            raise ValidationError(f"policy probabilities must have shape (T, S, A), got {probs.shape}")
        probs.setflags(write=False)
        self.probs = probs
        if actions is not None:
            actions = np.array(actions, dtype=int)
            actions.setflags(write=False)
        self.actions = actions

    @classmethod
    def from_actions(cls, actions, num_actions: int) -> "MarkovPolicy":
        actions = np.asarray(actions, dtype=int)
        probs = np.zeros(actions.shape + (num_actions,))
        np.put_along_axis(probs, actions[..., None], 1.0, axis=-1)
        return cls(probs, actions)

    @classmethod
    def stationary(cls, actions, num_actions: int, horizon: int) -> "MarkovPolicy":
        return cls.from_actions(np.broadcast_to(np.asarray(actions, int), (horizon, len(actions))), num_actions)

    @property
    def horizon(self) -> int:
        return self.probs.shape[0]

    @property
    def deterministic(self) -> bool:
        return self.actions is not None

    def violations(self):
        out = []
        if np.any(self.probs < 0):
            out.append("policy has negative probabilities")
        bad = np.argwhere(np.abs(self.probs.sum(axis=-1) - 1.0) > DIST_TOL)
        for t, s in bad:
            out.append(f"policy row (t={t + 1}, s={s}) does not sum to 1")
        return out

    def __repr__(self):
        kind = "deterministic" if self.deterministic else "randomized"
        T, S, A = self.probs.shape
        return f"MarkovPolicy({kind}, T={T}, S={S}, A={A})"


@dataclass(frozen=True)
class OccupancyMeasure:
    """Discounted per-stage state-action visitation ``rho[t, s, a]``.

    Stage weights include ``discount**t`` (zero-based ``t``), so
    ``rho[t].sum() == discount**t`` and ``(rho * r).sum()`` is the expected
    discounted reward of the inducing policy under rewards ``r``.
    """

    rho: np.ndarray

    def violations(self, model: MdpModel, tol: float = DIST_TOL):
        rho = self.rho
        out = []
        if np.any(rho < -tol):
            out.append("occupancy has negative entries")
        first = rho[0].sum(axis=1)
        for s in np.flatnonzero(np.abs(first - model.initial_dist) > tol):
            out.append(f"stage 1 mass at state {s} is {first[s]!r}, expected {model.initial_dist[s]!r}")
        for t in range(rho.shape[0] - 1):
            inflow = model.discount * np.einsum("sa,sak->k", rho[t], model.nominal_p)
            lhs = rho[t + 1].sum(axis=1)
            for s in np.flatnonzero(np.abs(lhs - inflow) > tol):
                out.append(f"flow conservation fails at stage {t + 2}, state {s}")
        return out

    def value(self, rewards) -> float:
        """Expected discounted reward ``sum rho[t,s,a] r[s,a]``."""
        return float(np.einsum("tsa,sa->", self.rho, rewards))

    def to_policy(self) -> MarkovPolicy:
        """Extract ``pi_t(a|s) ∝ rho_t(s, a)``; uniform at zero-mass states."""
        mass = self.rho.sum(axis=2, keepdims=True)
        A = self.rho.shape[2]
        with np.errstate(invalid="ignore", divide="ignore"):
            probs = np.where(mass > 0, self.rho / np.where(mass > 0, mass, 1.0), 1.0 / A)
        return MarkovPolicy(probs)


def _distribution_violations(rows, describe):
    out = []
    rows = np.asarray(rows)
    sums = rows.sum(axis=-1)
    for idx in np.ndindex(sums.shape):
        if np.any(rows[idx] < 0):
            out.append(f"{describe(*idx)} has negative probabilities")
        if abs(sums[idx] - 1.0) > DIST_TOL:
            out.append(f"{describe(*idx)} sums to {sums[idx]!r}, expected 1")
    return out


def validate_model(model: MdpModel, usets: Optional[UncertaintySet] = None):
    """Return a list of invariant violations (empty when the data is well formed).

    Each message names the offending index. Nothing is renormalized.
    """
    out = []
    if not 0.0 < model.discount <= 1.0:
        out.append(f"discount {model.discount} outside (0, 1]")
    if model.horizon is None and model.discount >= 1.0:
        out.append("discount = 1 is only allowed with a finite horizon")
    if model.horizon is not None and model.horizon < 1:
        out.append(f"horizon must be positive, got {model.horizon}")
    out += _distribution_violations(model.nominal_p, lambda s, a: f"transition row (s={s}, a={a})")
    alpha = model.initial_dist
    if np.any(alpha < 0):
        out.append("initial distribution has negative entries")
    if abs(alpha.sum() - 1.0) > DIST_TOL:
        out.append(f"initial distribution sums to {alpha.sum()!r}, expected 1")
    if not np.all(np.isfinite(model.nominal_r)):
        out.append("nominal rewards contain non-finite values")
    if usets is None:
        return out
    if usets.num_states != model.num_states:
        out.append(f"uncertainty set covers {usets.num_states} states, model has {model.num_states}")
        return out
    S, A = model.num_states, model.num_actions
    for s in range(S):
        vp, vr = usets.vertex_p[s], usets.vertex_r[s]
        if vp.shape[1:] != (A, S):
            out.append(f"state {s}: vertex transition shape {vp.shape[1:]} != {(A, S)}")
            continue
        if not (np.array_equal(vp[0], model.nominal_p[s]) and np.array_equal(vr[0], model.nominal_r[s])):
            out.append(f"state {s}: vertex 0 differs from the nominal parameters")
        for k in range(vp.shape[0]):
            out += _distribution_violations(
                vp[k], lambda a, s=s, k=k: f"state {s} vertex {k}: transition row (a={a})"
            )
        if not np.all(np.isfinite(vr)):
            out.append(f"state {s}: vertex rewards contain non-finite values")
    return out


def check_model(model: MdpModel, usets: Optional[UncertaintySet] = None):
    """Raise :class:`ValidationError` listing every violation, if any."""
    violations = validate_model(model, usets)
    if violations:
        raise ValidationError("invalid model:\n  " + "\n  ".join(violations), violations)
