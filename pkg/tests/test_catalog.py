"""Benchmark entries, their oracles, and network JSON loading."""

import numpy as np
import pytest
import scipy.linalg

from issnet.catalog import entries, instantiate, network_from_json, parse_ref
from issnet.gains import graph_to_json
from issnet.network import simulate
from issnet.systems import InputSignal


EXPECTED = {
    "counterexample-chain",
    "uniform-2-cycle",
    "nonuniform-discrete-chain",
    "linear-diffusive-chain",
}


def test_entry_listing():
    table = entries()
    assert set(table) == EXPECTED
    for name, entry in table.items():
        assert entry.name == name
        assert entry.description
    # the listing is a copy, not the registry itself
    table.clear()
    assert set(entries()) == EXPECTED


def test_instantiate_rejects_unknown_names_and_params():
    with pytest.raises(ValueError, match="unknown catalog entry"):
        instantiate("no-such-entry")
    with pytest.raises(ValueError, match="unknown parameters"):
        instantiate("uniform-2-cycle", {"bogus": 1.0})
    with pytest.raises(ValueError):
        instantiate("nonuniform-discrete-chain", {"theta": 1.5})
    with pytest.raises(ValueError):
        instantiate("linear-diffusive-chain", {"eps": 0.6})


def test_instantiate_applies_overrides():
    net, oracle = instantiate("uniform-2-cycle", {"a": 0.25, "c": 0.25})
    traj = simulate(net, (1, 2), np.ones(2), InputSignal.zero(), 1)
    assert traj.states[-1, 0] == 0.25
    # gain c/(1-a) and its norm bound follow the parameters
    assert net.graph.row(1)[2](1.0) == pytest.approx(1.0 / 3.0)
    assert oracle.xi(1.0) == pytest.approx(1.5)


def test_parse_ref():
    assert parse_ref("catalog:uniform-2-cycle") == ("uniform-2-cycle", {})
    name, params = parse_ref("catalog:uniform-2-cycle?a=0.3&c=0.1")
    assert name == "uniform-2-cycle"
    assert params == {"a": 0.3, "c": 0.1}
    with pytest.raises(ValueError):
        parse_ref("uniform-2-cycle")
    with pytest.raises(ValueError):
        parse_ref("catalog:x?a")


# Oracle cross-checks ----------------------------------------------------


def test_counterexample_oracle_matches_integration(counterexample):
    net, oracle = counterexample
    window = net.window(5)
    traj = simulate(net, window, np.ones(5), InputSignal.zero(), 2.0, dt=1e-3)
    for k in (0, 500, 2000):
        t = traj.times[k]
        for c, i in enumerate(window):
            assert traj.states[k, c] == pytest.approx(
                oracle.component_value(i, t, 1.0), abs=1e-8)
    assert oracle.any_input
    assert np.all(oracle.steady_state(window, 1.0) == 0.0)


def test_two_cycle_oracle_component_values(two_cycle):
    net, oracle = two_cycle
    traj = simulate(net, (1, 2), np.ones(2), InputSignal.zero(), 12)
    for k in range(13):
        assert traj.states[k, 0] == oracle.component_value(1, k, 1.0)
    assert oracle.gain_slack == 2.0


def test_chain_steady_state_oracle(chain):
    net, oracle = chain
    window = net.window(6)
    traj = simulate(net, window, np.zeros(6), InputSignal.constant(1.0), 400)
    assert np.allclose(traj.states[-1],
                       oracle.steady_state(window, 1.0), atol=1e-12)


def test_chain_linear_matrix_matches_stepping(chain):
    net, oracle = chain
    window = net.window(5)
    A, B = oracle.linear_matrix(window)
    rng = np.random.default_rng(3)
    x = rng.uniform(-1, 1, 5)
    traj = simulate(net, window, x.copy(), InputSignal.constant(0.3), 10)
    for _ in range(10):
        x = A @ x + B @ np.full(5, 0.3)
    assert np.allclose(traj.states[-1], x, atol=1e-14)


def test_diffusive_matches_matrix_exponential(diffusive):
    net, oracle = diffusive
    window = net.window(8)
    A, _B = oracle.linear_matrix(window)
    x0 = np.linspace(-1.0, 1.0, 8)
    traj = simulate(net, window, x0, InputSignal.zero(), 1.0, dt=1e-3)
    exact = scipy.linalg.expm(A * traj.times[-1]) @ x0
    assert np.allclose(traj.states[-1], exact, atol=1e-9)


def test_oracle_norm_bound_curves(two_cycle, chain, diffusive):
    for (net, oracle), slope in ((two_cycle, 2.0), (chain, 2.0),
                                 (diffusive, 1.0 / 0.6)):
        assert oracle.xi(1.0) == pytest.approx(slope)
        assert oracle.sigma(3.0) == 3.0


# Network JSON loading ---------------------------------------------------


def _toy_obj():
    return {
        "name": "toy-pair",
        "time_domain": {"kind": "discrete"},
        "index_set": {"kind": "finite", "labels": [0, 1]},
        "subsystems": [
            {"i": 0, "expr": "0.5*x + 0.25*w[0] + u", "neighbors": [1]},
            {"i": 1, "expr": "0.5*x"},
        ],
    }


def test_network_from_json_explicit():
    net, oracle = network_from_json(_toy_obj())
    assert oracle is None
    assert net.window() == (0, 1)
    traj = simulate(net, (0, 1), np.array([1.0, 1.0]),
                    InputSignal.constant(0.125), 2)
    # x0' = 0.5 x0 + 0.25 x1 + u, x1' = 0.5 x1, stepped by hand
    assert traj.states[1, 0] == 0.875
    assert traj.states[1, 1] == 0.5
    assert traj.states[2, 0] == 0.6875


def test_network_from_json_catalog_ref():
    net, oracle = network_from_json({"catalog": "uniform-2-cycle",
                                     "params": {"a": 0.25}})
    assert net.name == "uniform-2-cycle"
    assert oracle is not None


def test_network_from_json_carries_gain_graph(two_cycle):
    obj = _toy_obj()
    obj["gain_graph"] = graph_to_json(two_cycle[0].graph)
    net, _ = network_from_json(obj)
    assert net.graph is not None
    assert net.graph.row(1)[2](1.0) == pytest.approx(0.5)


def test_network_from_json_validation():
    obj = _toy_obj()
    obj["index_set"] = {"kind": "generator", "start": 0}
    with pytest.raises(ValueError, match="finite"):
        network_from_json(obj)
    obj = _toy_obj()
    obj["index_set"]["labels"] = [0, 1, 2]
    with pytest.raises(ValueError, match="no subsystem"):
        network_from_json(obj)


def test_expression_whitelist_blocks_escapes():
    for expr in ("__import__('os').system('true')",
                 "open('/etc/passwd')",
                 "x.__class__",
                 "globals()"):
        obj = _toy_obj()
        obj["subsystems"][1]["expr"] = expr
        with pytest.raises(ValueError, match="disallowed name"):
            network_from_json(obj)


def test_expression_math_helpers_work():
    obj = _toy_obj()
    obj["subsystems"][1]["expr"] = "0.5*tanh(x) + max(u, 0)"
    net, _ = network_from_json(obj)
    traj = simulate(net, (0, 1), np.ones(2), InputSignal.zero(), 1)
    assert traj.states[1, 1] == pytest.approx(0.5 * np.tanh(1.0))
