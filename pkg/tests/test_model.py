import numpy as np
import pytest

from coupled_rmdp import (MarkovPolicy, MdpModel, OccupancyMeasure, UncertaintySet, ValidationError,
                          check_model, validate_model)


def two_state():
    p = np.array([[[0.5, 0.5], [1.0, 0.0]], [[0.0, 1.0], [0.2, 0.8]]])
    r = np.array([[1.0, 0.0], [0.5, 2.0]])
    return MdpModel(p, r, [0.3, 0.7], horizon=4, discount=0.9)


def test_well_formed_model_has_no_violations():
    model = two_state()
    assert validate_model(model, UncertaintySet.singleton(model)) == []


def test_short_transition_row_is_named():
    model = two_state()
    p = model.nominal_p.copy()
    p[1, 0] = [0.0, 0.9]
    bad = MdpModel(p, model.nominal_r, model.initial_dist, horizon=4)
    violations = validate_model(bad)
    assert len(violations) == 1
    assert "s=1, a=0" in violations[0]


def test_vertex_zero_must_be_nominal():
    model = two_state()
    usets = UncertaintySet.singleton(model)
    vr = list(usets.vertex_r)
    vr[0] = vr[0] + 1.0
    violations = validate_model(model, UncertaintySet(usets.vertex_p, tuple(vr)))
    assert violations == ["state 0: vertex 0 differs from the nominal parameters"]


def test_bad_vertex_row_and_initial_dist():
    model = two_state()
    usets = UncertaintySet.from_deviations(model, [[(np.array([[0.5, 0.6], [1.0, 0.0]]), [0.0, 0.0])], None])
    violations = validate_model(model, usets)
    assert len(violations) == 1 and "state 0 vertex 1" in violations[0]
    bad = MdpModel(model.nominal_p, model.nominal_r, [0.5, 0.6], horizon=4)
    assert any("initial distribution" in v for v in validate_model(bad))


def test_undiscounted_infinite_horizon_rejected():
    model = MdpModel([[[1.0]]], [[1.0]], [1.0], horizon=None, discount=1.0)
    assert any("finite horizon" in v for v in validate_model(model))
    with pytest.raises(ValidationError):
        check_model(model)


def test_shape_errors_raise_early():
    with pytest.raises(ValidationError):
        MdpModel(np.ones((2, 2)), np.ones((2, 2)), [0.5, 0.5])
    with pytest.raises(ValidationError):
        MdpModel(np.ones((2, 1, 2)) / 2, np.ones((2, 2)), [0.5, 0.5])


def test_model_arrays_are_read_only():
    model = two_state()
    with pytest.raises(ValueError):
        model.nominal_p[0, 0, 0] = 1.0


def test_padded_repeats_nominal():
    model = two_state()
    usets = UncertaintySet.from_deviations(model, [[(model.nominal_p[0], [0.0, -1.0])] * 2, None])
    P, R = usets.padded()
    assert P.shape == (2, 3, 2, 2) and R.shape == (2, 3, 2)
    assert np.array_equal(R[1, 2], model.nominal_r[1])
    assert usets.is_reward_only()


def test_policy_from_actions_and_violations():
    pol = MarkovPolicy.from_actions([[0, 1], [1, 1]], 2)
    assert pol.deterministic and pol.violations() == []
    assert np.array_equal(pol.probs[0], [[1, 0], [0, 1]])
    bad = MarkovPolicy(np.full((1, 2, 2), 0.4))
    assert len(bad.violations()) == 2


def test_occupancy_to_policy_uniform_on_unvisited_states():
    rho = np.zeros((1, 2, 2))
    rho[0, 0] = [0.25, 0.75]
    pol = OccupancyMeasure(rho).to_policy()
    assert np.allclose(pol.probs[0], [[0.25, 0.75], [0.5, 0.5]])
