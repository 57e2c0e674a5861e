import math

import numpy as np
import pytest

import otkit

SWAP = np.array([[0.0, 1.0], [1.0, 0.0]])
P = np.array([0.3, 0.7])
Q = np.array([0.6, 0.4])


def line_cost(n):
    x = np.linspace(0.0, 1.0, n)
    return (x[:, None] - x[None, :]) ** 2


def test_logsumexp_does_not_overflow():
    assert otkit.logsumexp(np.array([1000.0, 1000.0])) == pytest.approx(1000.0 + math.log(2.0))


@pytest.mark.parametrize("method", ["sinkhorn", "aam"])
def test_approx_ot_two_points(method):
    res = otkit.approx_ot(SWAP, P, Q, 0.05, method=method)
    plan = res["plan"]
    assert 0.3 - 1e-12 <= res["objective"] <= 0.35
    np.testing.assert_allclose(plan.sum(axis=1), P, atol=1e-12)
    np.testing.assert_allclose(plan.sum(axis=0), Q, atol=1e-12)
    assert "gamma" in res["params"]


def test_exact_ot_matches_hand_solution():
    value, plan = otkit.exact_ot(SWAP, P, Q)
    assert value == pytest.approx(0.3)
    np.testing.assert_allclose(plan, [[0.3, 0.0], [0.3, 0.4]], atol=1e-12)


def test_sinkhorn_marginals():
    res = otkit.sinkhorn(SWAP, 0.1, P, Q, tol=1e-10)
    plan = res["plan"]
    err = np.abs(plan.sum(axis=1) - P).sum() + np.abs(plan.sum(axis=0) - Q).sum()
    assert err <= 1e-10


def test_rounding_example():
    out = otkit.round_to_polytope(np.array([[0.5, 0.1], [0.1, 0.3]]), np.full(2, 0.5), np.full(2, 0.5))
    np.testing.assert_allclose(out, [[0.403226, 0.096774], [0.096774, 0.403226]], atol=1e-6)


@pytest.mark.parametrize("method", ["ibp", "aibp"])
def test_barycenter_close_to_lp(method):
    cost = line_cost(3)
    measures = [np.array([0.6, 0.3, 0.1]), np.array([0.1, 0.2, 0.7])]
    eps = 0.25
    res = otkit.barycenter(measures, cost, eps, method=method)
    lp, _ = otkit.exact_barycenter(measures, cost)
    assert res["q_bar"].sum() == pytest.approx(1.0)
    assert res["objective"] - lp <= eps
    assert len(res["plans"]) == 2


def test_decentralized_reaches_consensus():
    rng = np.random.default_rng(3)
    measures = [rng.uniform(0.1, 1.0, 5) for _ in range(3)]
    measures = [w / w.sum() for w in measures]
    res = otkit.decentralized(measures, line_cost(5), [(0, 1), (1, 2)], 0.1, 2000)
    assert res["consensus_error"] < 1e-3
    assert res["condition_number"] == pytest.approx(3.0)
    assert np.abs(sum(res["u"])).max() < 1e-12


def test_fenchel_gradient_on_simplex():
    g = otkit.fenchel_dual_gradient(np.array([0.1, -0.2, 0.3]), np.full(3, 1 / 3), line_cost(3), 0.2)
    assert g.sum() == pytest.approx(1.0, abs=1e-12)
    assert (g >= 0).all()


def test_errors_map_to_python():
    with pytest.raises(otkit.InputError):
        otkit.exact_ot(np.array([[0.0, 1.0], [2.0, 0.0]]), P, Q)
    with pytest.raises(otkit.ParameterError):
        otkit.sinkhorn(SWAP, 0.0, P, Q)
    with pytest.raises(otkit.OtkitError):
        otkit.barycenter([P], SWAP, 0.1, method="nope")
