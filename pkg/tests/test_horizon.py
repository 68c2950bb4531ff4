import numpy as np
import pytest

from coupled_rmdp import (BudgetSpec, ConvergenceError, NotInSetError, UncertaintySet, UnsupportedInputError,
                          ValidationError, deviation_cost, solve_adaptive_finite, solve_continuous,
                          solve_nominal_infinite, solve_robust_uncoupled_infinite, solve_setup_a, solve_setup_b)
from coupled_rmdp.generators import random_instance

from conftest import one_state, with_reward_vertices
from oracles import scalar_fixed_point


@pytest.fixture
def toy():
    model = one_state(1.0, horizon=None, discount=0.5)
    return model, with_reward_vertices(model, [0.0])


class TestSetupA:
    def test_toy_fixed_point(self, toy):
        model, usets = toy
        vf = solve_setup_a(model, usets, 1, tol=1e-13)
        v0 = scalar_fixed_point(lambda x: 1 + 0.5 * x)
        v1 = scalar_fixed_point(lambda x: min(1 + 0.5 * x, 0 + 0.5 * v0))
        assert vf.values[0] == pytest.approx([v0, v1], abs=1e-12)
        assert vf.values[0].tolist() == pytest.approx([2.0, 1.0], abs=1e-12)

    def test_boundaries(self, rng):
        for _ in range(10):
            model, usets = random_instance(rng, 5, 3, None, 3)
            vf = solve_setup_a(model, usets, 0)
            assert np.allclose(vf.values[:, 0], solve_nominal_infinite(model).values, atol=1e-8)
            robust = solve_robust_uncoupled_infinite(model, usets).values
            big = solve_setup_a(model, usets, 4)
            assert np.all(robust <= big.values[:, -1] + 1e-8)
            assert np.all(np.diff(big.values, axis=1) <= 1e-9)

    def test_contraction(self, rng):
        model, usets = random_instance(rng, 5, 3, None, 3, discount=0.9)
        vf = solve_setup_a(model, usets, 3)
        res = np.array(vf.residuals)
        roundoff = 8 * np.finfo(float).eps * np.abs(vf.values).max()
        assert np.all(res[1:] <= (0.9 + 1e-12) * res[:-1] + roundoff)

    def test_rejects_undiscounted_and_negative_budget(self, toy):
        model, usets = toy
        with pytest.raises(UnsupportedInputError):
            solve_setup_a(one_state(horizon=None, discount=1.0), usets, 1)
        with pytest.raises(ValidationError):
            solve_setup_a(model, usets, -1)

    def test_iteration_cap(self, toy):
        model, usets = toy
        with pytest.raises(ConvergenceError) as err:
            solve_setup_a(model, usets, 1, tol=1e-14, max_iter=3)
        assert err.value.gap > 0


class TestSetupB:
    def test_beta_one_integer_grid_equals_setup_a(self, rng):
        for _ in range(5):
            model, usets = random_instance(rng, 4, 3, None, 3)
            D = int(rng.integers(0, 4))
            spec = BudgetSpec("discounted", D, 1.0, budget_grid_points=D + 1)
            b = solve_setup_b(model, usets, spec)
            a = solve_setup_a(model, usets, D)
            assert np.allclose(b.values, a.values, atol=1e-9)

    def test_toy(self, toy):
        model, usets = toy
        vf = solve_setup_b(model, usets, BudgetSpec("discounted", 1, 1.0, budget_grid_points=2), tol=1e-13)
        assert vf.values[0] == pytest.approx([2.0, 1.0], abs=1e-12)

    def test_discounting_budget_only_hurts(self, rng):
        model, usets = random_instance(rng, 4, 3, None, 3, discount=0.8)
        spec1 = BudgetSpec("discounted", 2, 1.0, budget_grid_points=21)
        spec2 = BudgetSpec("discounted", 2, 0.9, budget_grid_points=21)
        v1 = solve_setup_b(model, usets, spec1).values
        v2 = solve_setup_b(model, usets, spec2).values
        # with beta < 1 leftover budget grows, so Nature can do at least as much
        assert np.all(v2 <= v1 + 1e-8)

    def test_budget_cap(self):
        spec = BudgetSpec("discounted", 100, 0.9)
        assert spec.cap == pytest.approx(10.0)
        assert spec.grid()[-1] == pytest.approx(10.0)

    def test_invalid_beta(self, toy):
        model, usets = toy
        with pytest.raises(ValidationError):
            solve_setup_b(model, usets, BudgetSpec("discounted", 1, 0.3))


class TestContinuous:
    def test_two_point_magnitudes_equal_setup_a(self, rng):
        for _ in range(5):
            model, usets = random_instance(rng, 4, 3, None, 3)
            D = int(rng.integers(0, 4))
            spec = BudgetSpec("continuous", D, 1.0, budget_grid_points=D + 1, magnitude_grid_points=2)
            c = solve_continuous(model, usets, spec)
            assert np.allclose(c.values, solve_setup_a(model, usets, D).values, atol=1e-9)

    def test_finite_horizon_two_point_equals_adaptive(self, rng):
        model, usets = random_instance(rng, 4, 3, 5, 3, discount=1.0)
        spec = BudgetSpec("continuous", 2, 1.0, budget_grid_points=3, magnitude_grid_points=2)
        c = solve_continuous(model, usets, spec, horizon=model.horizon)
        a = solve_adaptive_finite(model, usets, 2)
        assert np.allclose(c.stage_values, a.values, atol=1e-12)

    def test_nested_refinement_is_monotone(self, rng):
        model, usets = random_instance(rng, 4, 3, None, 3, discount=0.8)
        tol = 1e-11
        prev = None
        for nm in (2, 3, 5, 9):
            vf = solve_continuous(model, usets, BudgetSpec("continuous", 2, 1.0, 9, nm), tol=tol)
            if prev is not None:
                assert np.all(vf.values <= prev + 2 * tol / (1 - 0.8))
            prev = vf.values

    def test_toy_half_budget(self, toy):
        # half a unit of budget: Nature spends it at once (reward 1/2) or later
        model, usets = toy
        vf = solve_continuous(model, usets, BudgetSpec("continuous", 0.5, 1.0, 3, 3), tol=1e-13)
        assert vf.at(0, 0.5) == pytest.approx(1.5, abs=1e-12)


class TestDeviationCost:
    def test_segment(self):
        model = one_state(1.0)
        usets = with_reward_vertices(model, [0.0])
        assert deviation_cost([[1.0]], [1.0], 0, usets) == 0.0
        assert deviation_cost([[1.0]], [0.25], 0, usets) == pytest.approx(0.75)
        assert deviation_cost([[1.0]], [0.0], 0, usets) == 1.0

    def test_outside_set(self):
        model = one_state(1.0)
        usets = with_reward_vertices(model, [0.0])
        with pytest.raises(NotInSetError):
            deviation_cost([[1.0]], [2.0], 0, usets)
        with pytest.raises(NotInSetError):
            deviation_cost([[1.0]], [0.5], 0, UncertaintySet.singleton(model))

    def test_cheapest_vertex(self):
        model = one_state(1.0)
        usets = with_reward_vertices(model, [0.0, 0.5])
        assert deviation_cost([[1.0]], [0.5], 0, usets) == pytest.approx(0.5)
        assert deviation_cost([[1.0]], [0.75], 0, usets) == pytest.approx(0.25)
