"""Shared test utilities: seedable random connected networks and exact
measurement synthesis."""

import numpy as np

from hydrostate import Measurement, MeasurementSet, Network, Node, Pipe
from hydrostate.hydraulics import solve_steady_state


def random_network(seed: int, n_nodes: int | None = None) -> Network:
    """Random connected network: a spanning tree plus extra edges.

    Node count defaults to a draw from [10, 30]; one or two fixed-head
    nodes, the rest demand nodes.
    """
    rng = np.random.default_rng((101, seed))
    n = int(n_nodes) if n_nodes is not None else int(rng.integers(10, 31))
    n_fixed = int(rng.integers(1, 3))

    nodes = []
    for i in range(n):
        if i < n_fixed:
            nodes.append(Node(f"t{i}", "fixed-head", head=float(rng.uniform(90, 110))))
        else:
            nodes.append(Node(f"n{i}", "demand", demand=float(rng.uniform(0.5, 2.5))))

    order = rng.permutation(n)
    pipes = []
    for k in range(1, n):
        a = nodes[order[int(rng.integers(0, k))]].id
        b = nodes[order[k]].id
        pipes.append(_pipe(len(pipes), a, b, rng))
    for _ in range(int(rng.integers(0, max(1, n // 2)))):
        a, b = rng.choice(n, size=2, replace=False)
        pipes.append(_pipe(len(pipes), nodes[a].id, nodes[b].id, rng))

    return Network(nodes, pipes)


def _pipe(index: int, a: str, b: str, rng) -> Pipe:
    return Pipe(
        f"p{index}",
        a,
        b,
        resistance=float(rng.uniform(1.0, 20.0)),
        exponent=1.852,
    )


def exact_measurements(
    net: Network,
    seed: int,
    *,
    n_flow: int = 2,
    n_head: int = 2,
    random_weights: bool = False,
) -> tuple[MeasurementSet, object]:
    """Measurement set whose values are exact forward-solve outputs.

    Returns (measurement set, true solve report)."""
    rng = np.random.default_rng((202, seed))
    truth = solve_steady_state(net)

    measurements = []
    for j in rng.choice(net.n_pipes, size=min(n_flow, net.n_pipes), replace=False):
        sigma = float(rng.uniform(0.01, 1.0)) if random_weights else 0.05
        measurements.append(
            Measurement("pipe-flow", net.pipes[j].id, float(truth.state.q[j]), sigma)
        )
    for i in rng.choice(net.n_demand, size=min(n_head, net.n_demand), replace=False):
        sigma = float(rng.uniform(0.01, 1.0)) if random_weights else 0.05
        measurements.append(
            Measurement(
                "node-head", net.demand_nodes[i].id, float(truth.state.H[i]), sigma
            )
        )
    demand_sigma = float(rng.uniform(0.01, 1.0)) if random_weights else 0.1
    return MeasurementSet(tuple(measurements), demand_sigma=demand_sigma), truth
