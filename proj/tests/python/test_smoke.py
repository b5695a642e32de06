import json
import math

import numpy as np
import pytest

import resilest


def test_three_inertia_analysis():
    model = resilest.three_inertia()
    assert (model.n, model.m, model.p) == (6, 1, 5)
    assert resilest.security_index(model) == 3
    assert resilest.is_redundant_observable(model, 2)
    assert not resilest.is_redundant_observable(model, 3)


def test_scalar_decode_recovers_state_and_support():
    phi = np.ones((3, 1))
    res = resilest.decode(phi, np.array([5.0, 5.0, 12.0]), q=1)
    assert res["estimate"][0] == pytest.approx(5.0)
    assert res["support"] == [3]
    assert res["objective"] == 1
    assert res["certified"]


def test_decode_refuses_uncorrectable_budget():
    with pytest.raises(resilest.PreconditionError):
        resilest.decode(np.ones((3, 1)), np.array([5.0, 5.0, 12.0]), q=2)


def test_scalar_constants_match_closed_form():
    c = resilest.robustness_constants(np.ones((3, 1)), q=1, r=1)
    # two unit blocks: sigma_min = sqrt(2); theta = max(0 + 1, sqrt(p - r)) = sqrt(2)
    assert c.rho == pytest.approx(math.sqrt(2.0))
    assert c.theta == pytest.approx(math.sqrt(2.0))
    assert c.kappa_c == pytest.approx(1.0 + math.sqrt(2.0))


def test_zoh_first_order_closed_form():
    A, B = resilest.zoh_discretize(np.array([[-1.0]]), np.array([[1.0]]), np.array([[1.0]]), 1.0)
    assert A[0, 0] == pytest.approx(math.exp(-1.0), rel=1e-14)
    assert B[0, 0] == pytest.approx(1.0 - math.exp(-1.0), rel=1e-14)


def test_short_demo_run_respects_bound():
    sc = json.loads(resilest.demo_scenario_json())
    sc["horizon"] = 2500
    out = resilest.simulate_scenario(json.dumps(sc))
    assert out["steps"] == 2500
    assert out["bound_violations"] == 0
    assert out["minimizer_steps"] >= 1


def test_bad_model_is_input_error():
    with pytest.raises(resilest.InputError):
        resilest.SystemModel(np.eye(2), np.zeros((3, 1)), np.eye(2))
