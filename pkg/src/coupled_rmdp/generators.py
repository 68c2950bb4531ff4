"""Random instance generators used by the tests, the acceptance sweeps and
the demo scripts."""

from __future__ import annotations

import numpy as np

from .model import MdpModel, UncertaintySet


def random_kernel(rng, num_states, num_actions, sparsity=0.0):
    """Random ``(S, A, S)`` kernel; ``sparsity`` zeroes a fraction of entries."""
    p = rng.random((num_states, num_actions, num_states))
    if sparsity > 0:
        p *= rng.random(p.shape) >= sparsity
        empty = p.sum(axis=-1) == 0
        p[empty, rng.integers(num_states, size=int(empty.sum()))] = 1.0
    return p / p.sum(axis=-1, keepdims=True)


def random_model(rng, num_states, num_actions, horizon=None, discount=1.0, reward_scale=1.0):
    p = random_kernel(rng, num_states, num_actions, sparsity=0.3)
    r = reward_scale * rng.uniform(-1.0, 1.0, (num_states, num_actions))
    alpha = rng.random(num_states)
    return MdpModel(p, r, alpha / alpha.sum(), horizon=horizon, discount=discount)


def random_uncertainty(rng, model: MdpModel, max_vertices, reward_only=False, pessimistic=True):
    """Random per-state vertex lists with 1..max_vertices vertices (nominal included).

    With ``pessimistic`` the deviating rewards are shifted down so deviations
    actually hurt; otherwise they are arbitrary.
    """
    S, A = model.num_states, model.num_actions
    deviations = []
    for s in range(S):
        k = int(rng.integers(0, max_vertices))
        extra = []
        for _ in range(k):
            if reward_only:
                p_s = model.nominal_p[s]
            else:
                p_s = random_kernel(rng, S, A)[s]
            shift = rng.uniform(0.0, 1.0, A) if pessimistic else rng.uniform(-1.0, 1.0, A)
            extra.append((p_s, model.nominal_r[s] - shift))
        deviations.append(extra)
    return UncertaintySet.from_deviations(model, deviations)


def random_instance(rng, max_states, max_actions, max_horizon=None, max_vertices=3, discount=None,
                    reward_only=False, pessimistic=True):
    """Draw sizes uniformly, then a model and its uncertainty sets.

    ``max_horizon=None`` gives an infinite-horizon model, which requires
    ``discount < 1``. When ``discount`` is ``None`` a finite model uses a
    random discount in ``[0.5, 1]``.
    """
    S = int(rng.integers(1, max_states + 1))
    A = int(rng.integers(1, max_actions + 1))
    if max_horizon is None:
        T = None
        g = discount if discount is not None else float(rng.uniform(0.5, 0.95))
    else:
        T = int(rng.integers(1, max_horizon + 1))
        g = discount if discount is not None else float(rng.choice([1.0, rng.uniform(0.5, 1.0)]))
    model = random_model(rng, S, A, horizon=T, discount=g)
    return model, random_uncertainty(rng, model, max_vertices, reward_only=reward_only, pessimistic=pessimistic)
