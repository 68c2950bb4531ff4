import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from coupled_rmdp import (MarkovPolicy, MdpModel, UncertaintySet, UnsupportedInputError, ValidationError,
                          evaluate_policy_exact, occupancy_measure, solve_nominal_finite, solve_nominal_infinite,
                          solve_robust_uncoupled_finite, solve_robust_uncoupled_infinite)
from coupled_rmdp.generators import random_instance, random_model

from conftest import one_state, with_reward_vertices
from oracles import best_deterministic_value, trajectory_value


class TestNominalFinite:
    def test_undiscounted_sum(self):
        model = one_state(1.0, horizon=3, discount=1.0)
        assert solve_nominal_finite(model).value(model.initial_dist) == 3.0

    def test_geometric_sum(self):
        model = one_state(1.0, horizon=3, discount=0.5)
        assert solve_nominal_finite(model).value(model.initial_dist) == 1.75

    def test_matches_policy_enumeration(self, rng):
        for _ in range(5):
            model = random_model(rng, 3, 2, horizon=3, discount=float(rng.uniform(0.5, 1.0)))
            sol = solve_nominal_finite(model)
            assert sol.value(model.initial_dist) == pytest.approx(best_deterministic_value(model), abs=1e-12)

    def test_policy_attains_value(self, rng):
        model = random_model(rng, 4, 3, horizon=5)
        sol = solve_nominal_finite(model)
        assert evaluate_policy_exact(model, sol.policy) == pytest.approx(sol.value(model.initial_dist), abs=1e-12)

    def test_ties_go_to_lowest_action(self):
        model = MdpModel([[[1.0], [1.0]]], [[1.0, 1.0]], [1.0], horizon=2)
        assert solve_nominal_finite(model).policy.actions.tolist() == [[0], [0]]

    def test_infinite_horizon_rejected(self):
        with pytest.raises(UnsupportedInputError):
            solve_nominal_finite(one_state(horizon=None, discount=0.5))


class TestNominalInfinite:
    def test_single_state(self):
        model = one_state(1.0, horizon=None, discount=0.9)
        sol = solve_nominal_infinite(model, tol=1e-10)
        assert sol.values[0] == pytest.approx(10.0, abs=1e-8)

    def test_absorbing_chain(self):
        p = np.array([[[0.0, 1.0]], [[0.0, 1.0]]])
        model = MdpModel(p, [[0.0], [1.0]], [1.0, 0.0], horizon=None, discount=0.5)
        v = solve_nominal_infinite(model, tol=1e-12).values
        assert v == pytest.approx([1.0, 2.0], abs=1e-10)

    def test_matches_long_truncation(self, rng):
        for _ in range(5):
            g = float(rng.uniform(0.5, 0.95))
            model = random_model(rng, 5, 3, horizon=None, discount=g)
            tol = 1e-10
            v = solve_nominal_infinite(model, tol=tol).values
            T = 200
            vt = solve_nominal_finite(model.with_horizon(T)).values[0]
            bound = g ** T * np.abs(model.nominal_r).max() / (1 - g) + tol * g / (1 - g)
            assert np.max(np.abs(v - vt)) <= bound

    def test_rejects_undiscounted(self):
        with pytest.raises(UnsupportedInputError):
            solve_nominal_infinite(one_state(horizon=None, discount=1.0))


class TestRobustUncoupled:
    def test_singleton_sets_equal_nominal(self, rng):
        model = random_model(rng, 4, 3, horizon=5)
        robust = solve_robust_uncoupled_finite(model, UncertaintySet.singleton(model))
        assert np.array_equal(robust.values, solve_nominal_finite(model).values)

    def test_worst_vertex_every_stage(self):
        model = one_state(1.0, horizon=3)
        sol = solve_robust_uncoupled_finite(model, with_reward_vertices(model, [0.0]))
        assert sol.value(model.initial_dist) == 0.0

    def test_below_nominal_everywhere(self, rng):
        for _ in range(20):
            model, usets = random_instance(rng, 5, 3, 6, 3, pessimistic=False)
            robust = solve_robust_uncoupled_finite(model, usets).values
            nominal = solve_nominal_finite(model).values
            assert np.all(robust <= nominal + 1e-12)

    def test_duplicate_vertex_changes_nothing(self, rng):
        model, usets = random_instance(rng, 4, 3, 5, 3)
        dup = usets.with_extra_vertex(1, usets.vertex_p[1][-1], usets.vertex_r[1][-1])
        assert np.array_equal(solve_robust_uncoupled_finite(model, usets).values,
                              solve_robust_uncoupled_finite(model, dup).values)

    def test_infinite_below_nominal(self, rng):
        model, usets = random_instance(rng, 4, 3, None, 3, discount=0.9)
        robust = solve_robust_uncoupled_infinite(model, usets).values
        assert np.all(robust <= solve_nominal_infinite(model).values + 1e-9)


class TestEvaluation:
    def test_deterministic_chain(self):
        p = np.array([[[0.0, 1.0, 0.0]], [[0.0, 0.0, 1.0]], [[0.0, 0.0, 1.0]]])
        model = MdpModel(p, [[1.0], [2.0], [4.0]], [1.0, 0.0, 0.0], horizon=3)
        pol = MarkovPolicy.from_actions(np.zeros((3, 3), int), 1)
        assert evaluate_policy_exact(model, pol) == 7.0

    def test_uniform_policy_matches_path_enumeration(self, rng):
        model = random_model(rng, 2, 2, horizon=2, discount=0.8)
        pol = MarkovPolicy(np.full((2, 2, 2), 0.5))
        assert evaluate_policy_exact(model, pol) == pytest.approx(trajectory_value(model, pol.probs), abs=1e-12)

    def test_zero_reward(self, rng):
        model = random_model(rng, 3, 2, horizon=4)
        pol = MarkovPolicy(rng.dirichlet(np.ones(2), size=(4, 3)))
        assert evaluate_policy_exact(model, pol, r=np.zeros((3, 2))) == 0.0

    def test_dimension_mismatch(self, rng):
        model = random_model(rng, 3, 2, horizon=4)
        with pytest.raises(ValidationError):
            evaluate_policy_exact(model, MarkovPolicy(np.full((3, 3, 2), 0.5)))

    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), c1=st.floats(-5, 5), c2=st.floats(-5, 5))
    def test_linear_in_rewards(self, seed, c1, c2):
        rng = np.random.default_rng(seed)
        model = random_model(rng, 3, 2, horizon=4, discount=0.9)
        pol = MarkovPolicy(rng.dirichlet(np.ones(2), size=(4, 3)))
        r1, r2 = rng.normal(size=(2, 3, 2))
        lhs = evaluate_policy_exact(model, pol, r=c1 * r1 + c2 * r2)
        rhs = c1 * evaluate_policy_exact(model, pol, r=r1) + c2 * evaluate_policy_exact(model, pol, r=r2)
        assert lhs == pytest.approx(rhs, abs=1e-9)


class TestOccupancy:
    def test_single_state_undiscounted(self):
        model = one_state(horizon=2, discount=1.0)
        rho = occupancy_measure(model, MarkovPolicy.from_actions([[0], [0]], 1)).rho
        assert rho[:, 0, 0].tolist() == [1.0, 1.0]

    def test_single_state_discounted(self):
        model = one_state(horizon=2, discount=0.5)
        rho = occupancy_measure(model, MarkovPolicy.from_actions([[0], [0]], 1)).rho
        assert rho[:, 0, 0].tolist() == [1.0, 0.5]

    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1))
    def test_invariants_and_reward_identity(self, seed):
        rng = np.random.default_rng(seed)
        T = int(rng.integers(1, 6))
        model = random_model(rng, 4, 3, horizon=T, discount=float(rng.uniform(0.3, 1.0)))
        pol = MarkovPolicy(rng.dirichlet(np.ones(3), size=(T, 4)))
        occ = occupancy_measure(model, pol)
        assert occ.violations(model) == []
        for t in range(T):
            assert occ.rho[t].sum() == pytest.approx(model.discount ** t, abs=1e-9)
        r = rng.normal(size=(4, 3))
        assert occ.value(r) == pytest.approx(evaluate_policy_exact(model, pol, r=r), abs=1e-9)
