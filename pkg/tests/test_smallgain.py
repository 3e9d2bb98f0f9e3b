"""Small-gain estimation, falsification, and cycle screening."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from issnet.comparison import compose, linear, power, pwl
from issnet.gains import FiniteIndexSet, GainGraph
from issnet.network import subnetwork
from issnet.smallgain import (
    dist_to_cone,
    estimate_uniform_sgc,
    exact_eta_two_node,
    falsify_mbi,
    finite_cycle_check,
    invert_k_curve,
    operator_deficit,
)


def _linear_graph(coeffs, labels):
    entries = {(i, j): linear(c) for (i, j), c in coeffs.items()}
    return GainGraph(FiniteIndexSet(tuple(labels)), entries=entries)


# Deficits ---------------------------------------------------------------


def test_dist_to_cone():
    assert dist_to_cone(np.array([1.0, 2.0])) == 0.0
    assert dist_to_cone(np.array([1.0, -3.0])) == 3.0
    assert dist_to_cone(np.array([])) == 0.0


def test_operator_deficit_two_cycle(two_cycle):
    net, _ = two_cycle
    # at the all-ones pattern each component contracts by exactly half
    d = operator_deficit(net.graph, np.array([1.0, 1.0]), (1, 2))
    assert d == pytest.approx(0.5)


def test_estimate_on_two_cycle(two_cycle):
    net, _ = two_cycle
    sgc = estimate_uniform_sgc(net.graph, (1, 2), seed=0)
    assert sgc.holds
    assert sgc.samples_per_radius == 69
    assert sgc.eta_hat(1.0) == pytest.approx(0.5)
    assert sgc.xi_hat(0.5) == pytest.approx(1.0)
    assert sgc.deficits[0] == pytest.approx(0.005)
    assert sgc.deficits[2] == pytest.approx(0.05)
    # the estimate matches the closed form on this graph
    exact = exact_eta_two_node(0.5, 0.5)
    for r in (0.1, 1.0, 10.0):
        assert sgc.eta_hat(r) == pytest.approx(exact(r), rel=1e-6)


def test_estimate_is_exact_on_chain_window(chain):
    net, _ = chain
    subset = tuple(range(5))
    sub = subnetwork(net, subset)
    sgc = estimate_uniform_sgc(sub.graph, subset, seed=5)
    assert sgc.holds
    # worst-direction fixed point: amplification 2 - 2^-4 on five nodes
    assert sgc.xi_hat(1.0) == pytest.approx(1.9375)
    assert sgc.eta_hat(1.0) == pytest.approx(1.0 / 1.9375)
    assert falsify_mbi(sub.graph, subset, sgc.xi_hat,
                       budget=10_000, seed=5) is None


def test_estimate_detects_failure():
    g = _linear_graph({(0, 1): 1.0, (1, 0): 1.0}, (0, 1))
    sgc = estimate_uniform_sgc(g, (0, 1), seed=0)
    assert not sgc.holds
    assert sgc.eta_hat is None
    assert sgc.xi_hat is None


# Curve inversion --------------------------------------------------------


@pytest.mark.parametrize("curve", [
    linear(2.0),
    power(3.0, 0.5),
    pwl([(0.0, 0.0), (1.0, 0.5), (2.0, 2.0)], "Kinf"),
])
def test_invert_k_curve_round_trip(curve):
    inv = invert_k_curve(curve)
    for r in (0.1, 0.7, 1.5, 4.0):
        assert inv(curve(r)) == pytest.approx(r, rel=1e-9)
        assert curve(inv(r)) == pytest.approx(r, rel=1e-9)


def test_invert_compose():
    c = compose(linear(2.0), power(1.0, 2.0))     # 2 r^2
    inv = invert_k_curve(c)
    for r in (0.5, 1.0, 3.0):
        assert inv(c(r)) == pytest.approx(r, rel=1e-9)


# Falsification ----------------------------------------------------------


def test_no_witness_against_true_bound(two_cycle):
    net, _ = two_cycle
    assert falsify_mbi(net.graph, (1, 2), linear(2.0),
                       budget=2000, seed=0) is None


def test_witness_against_tight_bound(two_cycle):
    net, _ = two_cycle
    w = falsify_mbi(net.graph, (1, 2), linear(1.2), budget=2000, seed=0)
    assert w is not None
    assert np.allclose(w.v, [0.01, 0.01])
    assert np.allclose(w.w, [0.005, 0.005])
    assert w.margin == pytest.approx(0.004)
    assert w.validate(net.graph, linear(1.2))


def test_witness_validation_is_exact(two_cycle):
    net, _ = two_cycle
    w = falsify_mbi(net.graph, (1, 2), linear(1.2), budget=2000, seed=0)
    # validation recomputes the slack; a transcription error must fail it
    tampered = type(w)(w.window, w.v, tuple(x + 1e-12 for x in w.w),
                       w.norm_v, w.norm_w, w.xi_at_w, w.margin,
                       w.samples_used, w.seed)
    assert not tampered.validate(net.graph, linear(1.2))


def test_witness_respects_budget(two_cycle):
    net, _ = two_cycle
    w = falsify_mbi(net.graph, (1, 2), linear(1.2), budget=500, seed=3)
    assert w is None or w.samples_used <= 500


# Cycle screening --------------------------------------------------------


def test_cycle_check_two_cycle(two_cycle):
    net, _ = two_cycle
    report = finite_cycle_check(net.graph, (1, 2))
    assert report.passed
    assert report.n_cycles == 1
    assert report.worst_margin == pytest.approx(0.75)


def test_cycle_check_rejects_unit_loop():
    g = _linear_graph({(0, 1): 1.25, (1, 0): 0.8}, (0, 1))
    report = finite_cycle_check(g, (0, 1))
    assert not report.passed       # folded gain reaches the identity


def test_cycle_check_acyclic(chain):
    net, _ = chain
    subset = tuple(range(4))
    sub = subnetwork(net, subset)
    report = finite_cycle_check(sub.graph, subset)
    assert report.passed
    assert report.n_cycles == 0


# Shrinking and restriction never create witnesses -----------------------


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000))
def test_derived_bound_survives_restriction_and_shrink(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(3, 6))
    coeffs = {}
    for i in range(n):
        for j in range(n):
            if i != j and rng.random() < 0.5:
                coeffs[(i, j)] = float(rng.uniform(0.1, 0.8))
    if not coeffs:
        coeffs[(0, 1)] = 0.5
    g = _linear_graph(coeffs, range(n))
    window = tuple(range(n))
    sgc = estimate_uniform_sgc(g, window, n_random=16, seed=seed)
    assert sgc.holds
    assert falsify_mbi(g, window, sgc.xi_hat, budget=800, seed=seed) is None

    keep = tuple(sorted(rng.choice(n, size=int(rng.integers(1, n)),
                                   replace=False).tolist()))
    sub = _linear_graph({k: c for k, c in coeffs.items()
                         if k[0] in keep and k[1] in keep}, keep)
    assert falsify_mbi(sub, keep, sgc.xi_hat, budget=800, seed=seed) is None

    lam = float(rng.uniform(0.3, 0.95))
    shrunk = _linear_graph({k: lam * c for k, c in coeffs.items()}, range(n))
    assert falsify_mbi(shrunk, window, sgc.xi_hat, budget=800, seed=seed) is None
