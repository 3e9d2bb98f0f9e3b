"""Benchmark interconnections with known analytic behavior.

Four families, each built as a NetworkSpec plus an oracle bundle holding the
closed forms the test suite compares against:

* counterexample-chain: decoupled continuous chain dx_i/dt = -(1/i) x_i,
  i = 1, 2, ...  Every component is exponentially stable, but the decay is
  not uniform over components, so no single decay curve works for every
  window; sup-norm over the window n stays at exp(-t/n).
* uniform-2-cycle: two discrete subsystems x_i+ = max(a x_i, c x_other, u_i)
  with a uniform contraction; stored cycle gains are (c/(1-a)) id, the
  conservative sum-style unrolling, so the recorded curve dominates the
  empirically tight c id by the documented slack 1/(1-a).
* nonuniform-discrete-chain: x_i+ = a_i x_i + b_i x_{i+1} + (1-a_i) u_i with
  a_i = 1 - 1/(i+2) and b_i = theta (1-a_i).  Per-component contraction rates
  degrade along the chain; internal gains are theta id, the external channel
  is normalized so every external gain is exactly id.
* linear-diffusive-chain: dx_i/dt = -x_i + eps (x_{i-1} + x_{i+1}) + u_i;
  a uniformly stable diffusive coupling for eps < 1/2, stored neighbor gains
  2 eps id (tight when both neighbors are driven together).
"""

from __future__ import annotations

import urllib.parse
from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np

from .comparison import ScalarCurve, identity, linear, zero_curve
from .gains import (FiniteIndexSet, GainGraph, GeneratorIndexSet,
                    graph_from_json, register_gain_generator)
from .network import NetworkSpec
from .systems import DISCRETE, SubsystemSpec, continuous

__all__ = [
    "CatalogEntry",
    "Oracle",
    "entries",
    "instantiate",
    "parse_ref",
    "network_from_json",
]


@dataclass(frozen=True, eq=False)
class Oracle:
    """Closed forms used to cross-check the numerics."""

    sigma: ScalarCurve                      # uniform transient bound curve
    external_gain: ScalarCurve              # uniform dominator of the gamma_i
    xi: ScalarCurve | None = None           # monotone-bound curve of the gain graph
    component_value: Callable | None = None  # (i, t, x0_i) -> exact zero-input value
    any_input: bool = False                 # closed form holds for every input
    steady_state: Callable | None = None    # (window, level) -> vector under constant input
    linear_matrix: Callable | None = None   # window -> (A, B) for linear entries
    gain_slack: float = 1.0                 # stored gain / tight empirical gain
    notes: str = ""


@dataclass(frozen=True, eq=False)
class CatalogEntry:
    name: str
    description: str
    defaults: Mapping[str, float]
    build: Callable[[Mapping[str, float]], tuple[NetworkSpec, Oracle]]

    def instantiate(self, params: Mapping[str, float] | None = None):
        p = dict(self.defaults)
        if params:
            unknown = set(params) - set(p)
            if unknown:
                raise ValueError(f"unknown parameters for {self.name}: {sorted(unknown)}")
            p.update({k: float(v) for k, v in params.items()})
        return self.build(p)


# counterexample-chain ---------------------------------------------------


def _build_counterexample(p):
    index_set = GeneratorIndexSet(start=1, name="counterexample-chain")

    def subsystem(i: int) -> SubsystemSpec:
        if i < 1:
            raise ValueError("labels start at 1")
        inv = 1.0 / i

        def dyn(x, w, u, _inv=inv):
            return -_inv * x

        return SubsystemSpec(f"node{i}", continuous(1e-3), dyn, neighbors=())

    def fast(window):
        inv = 1.0 / np.asarray(window, float)

        def field(x, u):
            return -inv * x

        return field

    graph = GainGraph(index_set, row_fn=lambda i: {},
                      external_fn=lambda i: zero_curve(),
                      assumption1_bound=zero_curve(),
                      generator_name="decoupled", generator_params={})
    net = NetworkSpec("counterexample-chain", continuous(1e-3), index_set,
                      subsystem, graph, fast)

    def component_value(i, t, x0):
        return float(np.exp(-np.asarray(t, float) / i) * x0)

    oracle = Oracle(
        sigma=identity(),
        external_gain=zero_curve(),
        xi=identity(),
        component_value=component_value,
        any_input=True,           # the input channel is absent from the dynamics
        steady_state=lambda window, level: np.zeros(len(window)),
        notes="decoupled; slowest window component sets the sup norm exp(-t/n)",
    )
    return net, oracle


# uniform-2-cycle --------------------------------------------------------


def _build_two_cycle(p):
    a, c = p["a"], p["c"]
    if not (0 <= a < 1):
        raise ValueError("need 0 <= a < 1")
    if not (0 <= c < 1):
        raise ValueError("need 0 <= c < 1")
    index_set = FiniteIndexSet((1, 2))

    def subsystem(i: int) -> SubsystemSpec:
        if i not in (1, 2):
            raise ValueError("labels are 1 and 2")

        def dyn(x, w, u):
            return max(a * x, c * w[0], u)

        return SubsystemSpec(f"node{i}", DISCRETE, dyn, neighbors=(3 - i,))

    def fast(window):
        pos = {i: k for k, i in enumerate(window)}
        other = np.array([pos.get(3 - i, len(window)) for i in window])

        def step(x, u):
            xp = np.append(x, 0.0)
            return np.maximum(np.maximum(a * x, c * xp[other]), u)

        return step

    g = linear(c / (1.0 - a)) if c > 0 else zero_curve()
    graph = GainGraph(index_set,
                      entries={(1, 2): g, (2, 1): g},
                      external={1: identity(), 2: identity()})
    net = NetworkSpec("uniform-2-cycle", DISCRETE, index_set, subsystem, graph, fast)

    def component_value(i, k, x0):
        # exact for symmetric starts (both components at x0) when c <= a
        return float(a ** np.asarray(k, float) * x0)

    oracle = Oracle(
        sigma=identity(),
        external_gain=identity(),
        xi=linear(1.0 / (1.0 - c / (1.0 - a))) if c / (1.0 - a) < 1 else None,
        component_value=component_value if c <= a else None,
        steady_state=lambda window, level: np.full(len(window), max(level, 0.0)),
        gain_slack=1.0 / (1.0 - a),
        notes="stored gains use the sum-style unrolling; tight neighbor gain is c id",
    )
    return net, oracle


# nonuniform-discrete-chain ----------------------------------------------


def _chain_coeffs(labels: np.ndarray, theta: float):
    rate = 1.0 / (labels + 2.0)
    a = 1.0 - rate
    return a, theta * rate, rate


def _build_nonuniform_chain(p):
    theta = p["theta"]
    if not (0 <= theta < 1):
        raise ValueError("need 0 <= theta < 1 for the monotone-bound closed form")
    index_set = GeneratorIndexSet(start=0, name="nonuniform-discrete-chain")

    def subsystem(i: int) -> SubsystemSpec:
        if i < 0:
            raise ValueError("labels start at 0")
        a, b, cc = _chain_coeffs(np.asarray(float(i)), theta)

        def dyn(x, w, u, _a=float(a), _b=float(b), _c=float(cc)):
            return _a * x + _b * w[0] + _c * u

        return SubsystemSpec(f"node{i}", DISCRETE, dyn, neighbors=(i + 1,))

    def fast(window):
        w = np.asarray(window, float)
        a, b, cc = _chain_coeffs(w, theta)
        pos = {i: k for k, i in enumerate(window)}
        nxt = np.array([pos.get(i + 1, len(window)) for i in window])

        def step(x, u):
            xp = np.append(x, 0.0)
            return a * x + b * xp[nxt] + cc * u

        return step

    def row_fn(i):
        return {i + 1: linear(theta)} if theta > 0 else {}

    graph = GainGraph(index_set, row_fn=row_fn,
                      external_fn=lambda i: identity(),
                      assumption1_bound=linear(theta),
                      generator_name="unidirectional-chain",
                      generator_params={"theta": theta, "start": 0})
    net = NetworkSpec("nonuniform-discrete-chain", DISCRETE, index_set,
                      subsystem, graph, fast)

    def component_value(i, k, x0):
        # exact when theta == 0 (decoupled); used as the decoupled oracle
        a = 1.0 - 1.0 / (i + 2.0)
        return float(a ** np.asarray(k, float) * x0)

    def steady_state(window, level):
        # x*_i = theta x*_{i+1} + level, solved from the right edge (zero beyond)
        out = np.zeros(len(window))
        pos = {i: k for k, i in enumerate(window)}
        for i in sorted(window, reverse=True):
            nxt = out[pos[i + 1]] if (i + 1) in pos else 0.0
            out[pos[i]] = theta * nxt + level
        return out

    def linear_matrix(window):
        labels = np.asarray(window, float)
        a, b, cc = _chain_coeffs(labels, theta)
        A = np.diag(a)
        pos = {i: k for k, i in enumerate(window)}
        for k, i in enumerate(window):
            if (i + 1) in pos:
                A[k, pos[i + 1]] = b[k]
        return A, np.diag(cc)

    oracle = Oracle(
        sigma=identity(),
        external_gain=identity(),
        xi=linear(1.0 / (1.0 - theta)) if theta < 1 else None,
        component_value=component_value if theta == 0 else None,
        steady_state=steady_state,
        linear_matrix=linear_matrix,
        notes="per-component rates a_i = 1 - 1/(i+2) degrade along the chain",
    )
    return net, oracle


# linear-diffusive-chain -------------------------------------------------


def _build_diffusive(p):
    eps = p["eps"]
    if not (0 <= eps < 0.5):
        raise ValueError("need 0 <= eps < 1/2 for stability of the coupling")
    index_set = GeneratorIndexSet(start=0, name="linear-diffusive-chain")

    def subsystem(i: int) -> SubsystemSpec:
        if i < 0:
            raise ValueError("labels start at 0")
        nbrs = (i + 1,) if i == 0 else (i - 1, i + 1)

        def dyn(x, w, u):
            return -x + eps * float(np.sum(w)) + u

        return SubsystemSpec(f"node{i}", continuous(1e-3), dyn, neighbors=nbrs)

    def fast(window):
        pos = {i: k for k, i in enumerate(window)}
        n = len(window)
        left = np.array([pos.get(i - 1, n) for i in window])
        right = np.array([pos.get(i + 1, n) for i in window])

        def field(x, u):
            xp = np.append(x, 0.0)
            return -x + eps * (xp[left] + xp[right]) + u

        return field

    gain = linear(2.0 * eps) if eps > 0 else zero_curve()

    def row_fn(i):
        if eps == 0:
            return {}
        row = {i + 1: gain}
        if i - 1 >= 0:
            row[i - 1] = gain
        return row

    graph = GainGraph(index_set, row_fn=row_fn,
                      external_fn=lambda i: identity(),
                      assumption1_bound=gain,
                      generator_name="bidirectional-chain",
                      generator_params={"gain": 2.0 * eps, "start": 0})
    net = NetworkSpec("linear-diffusive-chain", continuous(1e-3), index_set,
                      subsystem, graph, fast)

    def linear_matrix(window):
        n = len(window)
        pos = {i: k for k, i in enumerate(window)}
        A = -np.eye(n)
        for k, i in enumerate(window):
            for j in (i - 1, i + 1):
                if j in pos:
                    A[k, pos[j]] = eps
        return A, np.eye(n)

    def component_value(i, t, x0):
        # exact only when eps == 0
        return float(np.exp(-np.asarray(t, float)) * x0)

    oracle = Oracle(
        sigma=identity(),
        external_gain=identity(),
        xi=linear(1.0 / (1.0 - 2.0 * eps)) if eps < 0.5 else None,
        component_value=component_value if eps == 0 else None,
        linear_matrix=linear_matrix,
        gain_slack=1.0 if eps == 0 else 2.0,
        notes="neighbor gains 2 eps id are tight when both neighbors are driven",
    )
    return net, oracle


_ENTRIES = {
    "counterexample-chain": CatalogEntry(
        "counterexample-chain",
        "decoupled continuous chain with per-component rate 1/i; "
        "componentwise stable, no uniform decay across windows",
        {},
        _build_counterexample),
    "uniform-2-cycle": CatalogEntry(
        "uniform-2-cycle",
        "two discrete max-coupled subsystems with a uniform contraction",
        {"a": 0.5, "c": 0.25},
        _build_two_cycle),
    "nonuniform-discrete-chain": CatalogEntry(
        "nonuniform-discrete-chain",
        "discrete chain with degrading contraction rates and gains theta id",
        {"theta": 0.5},
        _build_nonuniform_chain),
    "linear-diffusive-chain": CatalogEntry(
        "linear-diffusive-chain",
        "continuous diffusively coupled linear chain",
        {"eps": 0.2},
        _build_diffusive),
}


def entries() -> dict[str, CatalogEntry]:
    return dict(_ENTRIES)


def instantiate(name: str, params: Mapping[str, float] | None = None):
    """Build (NetworkSpec, Oracle) for a catalog entry by name."""
    if name not in _ENTRIES:
        raise ValueError(f"unknown catalog entry {name!r}; "
                         f"have {sorted(_ENTRIES)}")
    return _ENTRIES[name].instantiate(params)


def parse_ref(ref: str):
    """Parse 'catalog:<name>?k=v&...' into (name, params)."""
    if not ref.startswith("catalog:"):
        raise ValueError("catalog references start with 'catalog:'")
    rest = ref[len("catalog:"):]
    name, _, query = rest.partition("?")
    params = {}
    if query:
        for k, vals in urllib.parse.parse_qs(query, strict_parsing=True).items():
            params[k] = float(vals[-1])
    return name, params


# Gain generator registry (for graph JSON round trips) -------------------


def _gen_decoupled(params):
    return (lambda i: {}), (lambda i: zero_curve()), zero_curve()


def _gen_unidirectional(params):
    theta = float(params.get("theta", 0.5))
    g = linear(theta) if theta > 0 else zero_curve()
    return (lambda i: ({i + 1: g} if theta > 0 else {})), \
        (lambda i: identity()), g


def _gen_bidirectional(params):
    gain = float(params.get("gain", 0.4))
    start = int(params.get("start", 0))
    g = linear(gain) if gain > 0 else zero_curve()

    def row(i):
        if gain == 0:
            return {}
        out = {i + 1: g}
        if i - 1 >= start:
            out[i - 1] = g
        return out

    return row, (lambda i: identity()), g


register_gain_generator("decoupled", _gen_decoupled)
register_gain_generator("unidirectional-chain", _gen_unidirectional)
register_gain_generator("bidirectional-chain", _gen_bidirectional)


# Network JSON loading ---------------------------------------------------

_SAFE_FUNCS = {
    "abs": abs, "min": min, "max": max,
    "exp": np.exp, "log": np.log, "sqrt": np.sqrt, "tanh": np.tanh,
    "sin": np.sin, "cos": np.cos, "sign": np.sign, "pi": np.pi,
}


def _compile_dynamics(expr: str):
    """Restricted arithmetic expression in x, w, u.  Only for configs the
    operator already trusts; no builtins are exposed."""
    code = compile(expr, "<subsystem-expression>", "eval")
    for name in code.co_names:
        if name not in _SAFE_FUNCS and name not in ("x", "w", "u"):
            raise ValueError(f"expression uses disallowed name {name!r}")

    def dyn(x, w, u):
        return float(eval(code, {"__builtins__": {}},
                          {**_SAFE_FUNCS, "x": x, "w": w, "u": u}))

    return dyn


def network_from_json(obj: dict) -> tuple[NetworkSpec, Oracle | None]:
    """Build a network from its JSON description.

    Either {"catalog": name, "params": {...}} or an explicit description
    with time_domain, index_set, and a subsystem list of
    {"i": label, "expr": str, "neighbors": [...]}.
    """
    if "catalog" in obj:
        net, oracle = instantiate(obj["catalog"], obj.get("params"))
        return net, oracle
    td = obj["time_domain"]
    domain = DISCRETE if td["kind"] == "discrete" else continuous(td.get("dt"))
    idx = obj["index_set"]
    if idx.get("kind") != "finite":
        raise ValueError("explicit network files need a finite index set")
    subs = {}
    for s in obj["subsystems"]:
        i = int(s["i"])
        dyn = _compile_dynamics(s["expr"])
        subs[i] = SubsystemSpec(s.get("name", f"node{i}"), domain, dyn,
                                neighbors=tuple(int(j) for j in s.get("neighbors", ())),
                                expression=s["expr"])
    labels = idx.get("labels")
    if labels is None:
        labels = sorted(subs)
    index_set = FiniteIndexSet(tuple(int(i) for i in labels))
    missing = [i for i in index_set.labels if i not in subs]
    if missing:
        raise ValueError(f"no subsystem given for labels {missing}")
    graph = graph_from_json(obj["gain_graph"]) if "gain_graph" in obj else None
    net = NetworkSpec(obj.get("name", "network"), domain, index_set,
                      lambda i: subs[i], graph, None)
    return net, None
