"""Pipe-network data model, validation, and structural matrices.

A network is a directed multigraph of demand nodes (known consumption,
unknown head) and fixed-head nodes (reservoirs), connected by pipes that
lose head according to a per-pipe monomial law

    h_j = r_j * q_j * |q_j| ** (n_j - 1),       n_j > 1.

Pipe orientation fixes the flow sign: q_j > 0 means flow from `from` to
`to`. Incidence columns carry +1 where a pipe enters a node and -1 where it
leaves, which makes the continuity rows read A12^T q = Q directly.
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import ValidationError

DEFAULT_EXPONENT = 1.852

# Regularization floor on |q| used by the loss law and its derivative; keeps
# the linearized system well-posed at zero flow.
FLOW_FLOOR = 1e-6

KIND_DEMAND = "demand"
KIND_FIXED = "fixed-head"


@dataclass(frozen=True)
class Node:
    id: str
    kind: str
    head: float | None = None
    demand: float | None = None


@dataclass(frozen=True)
class Pipe:
    id: str
    from_node: str
    to_node: str
    resistance: float
    exponent: float = DEFAULT_EXPONENT


class Network:
    """Validated immutable network with precomputed index arrays.

    Node and pipe ordering is the construction order; it defines the
    canonical ordering of the unknowns (q in pipe order, H in demand-node
    order).
    """

    def __init__(self, nodes: list[Node], pipes: list[Pipe]):
        self.nodes = tuple(nodes)
        self.pipes = tuple(pipes)
        _validate(self.nodes, self.pipes)

        self.demand_nodes = tuple(n for n in self.nodes if n.kind == KIND_DEMAND)
        self.fixed_nodes = tuple(n for n in self.nodes if n.kind == KIND_FIXED)
        self._demand_index = {n.id: i for i, n in enumerate(self.demand_nodes)}
        self._fixed_index = {n.id: i for i, n in enumerate(self.fixed_nodes)}
        self._pipe_index = {p.id: j for j, p in enumerate(self.pipes)}

        self.demand = np.array([n.demand for n in self.demand_nodes], dtype=float)
        self.fixed_heads = np.array([n.head for n in self.fixed_nodes], dtype=float)
        self.resistance = np.array([p.resistance for p in self.pipes], dtype=float)
        self.exponent = np.array([p.exponent for p in self.pipes], dtype=float)

        self._a12, self._a10 = _build_incidence(
            self.pipes, self._demand_index, self._fixed_index
        )
        self._a12.setflags(write=False)
        self._a10.setflags(write=False)
        for arr in (self.demand, self.fixed_heads, self.resistance, self.exponent):
            arr.setflags(write=False)

    @property
    def n_pipes(self) -> int:
        return len(self.pipes)

    @property
    def n_demand(self) -> int:
        return len(self.demand_nodes)

    @property
    def n_fixed(self) -> int:
        return len(self.fixed_nodes)

    def pipe_index(self, pipe_id: str) -> int:
        return self._pipe_index[pipe_id]

    def demand_index(self, node_id: str) -> int:
        return self._demand_index[node_id]

    def has_pipe(self, pipe_id: str) -> bool:
        return pipe_id in self._pipe_index

    def has_demand_node(self, node_id: str) -> bool:
        return node_id in self._demand_index

    def with_demands(self, demands: np.ndarray) -> "Network":
        """Copy of the network with the demand vector replaced."""
        demands = np.asarray(demands, dtype=float)
        if demands.shape != (self.n_demand,):
            raise ValueError(
                f"expected {self.n_demand} demands, got shape {demands.shape}"
            )
        new_nodes = []
        k = 0
        for node in self.nodes:
            if node.kind == KIND_DEMAND:
                new_nodes.append(Node(node.id, node.kind, demand=float(demands[k])))
                k += 1
            else:
                new_nodes.append(node)
        return Network(new_nodes, list(self.pipes))


def parse_network(text: str) -> Network:
    """Build a validated Network from network-file JSON text."""
    from .report_io import decode_network

    return decode_network(text)


def incidence_matrices(net: Network) -> tuple[np.ndarray, np.ndarray]:
    """Signed incidence blocks (A12 over demand nodes, A10 over fixed).

    Entry (j, i) is +1 when pipe j enters node i under the orientation
    convention and -1 when it leaves; each pipe row has exactly two
    nonzeros across (A12 | A10).
    """
    return net._a12, net._a10


def headloss_coefficients(net: Network, q: np.ndarray) -> np.ndarray:
    """Diagonal entries r_j * max(|q_j|, floor) ** (n_j - 1)."""
    q = np.asarray(q, dtype=float)
    if q.shape != (net.n_pipes,):
        raise ValueError(f"expected {net.n_pipes} flows, got shape {q.shape}")
    return _kernels.loss_coefficients(q, net.resistance, net.exponent, FLOW_FLOOR)


def headloss_diagonal(net: Network, q: np.ndarray) -> np.ndarray:
    """The L x L diagonal loss matrix; row j of (this @ q) is the signed
    head loss across pipe j."""
    return np.diag(headloss_coefficients(net, q))


def _build_incidence(pipes, demand_index, fixed_index):
    a12 = np.zeros((len(pipes), len(demand_index)))
    a10 = np.zeros((len(pipes), len(fixed_index)))
    for j, p in enumerate(pipes):
        for node_id, sign in ((p.from_node, -1.0), (p.to_node, +1.0)):
            if node_id in demand_index:
                a12[j, demand_index[node_id]] = sign
            else:
                a10[j, fixed_index[node_id]] = sign
    return a12, a10


def _validate(nodes, pipes):
    seen = set()
    for i, node in enumerate(nodes):
        if node.id in seen:
            raise ValidationError(
                f"/nodes/{i}/id", "unique node id", f"duplicate id {node.id!r}"
            )
        seen.add(node.id)
        if node.kind == KIND_DEMAND:
            if node.demand is None or node.head is not None:
                raise ValidationError(
                    f"/nodes/{i}", "demand node with demand only",
                    f"node {node.id!r} fields do not match kind",
                )
            if node.demand < 0:
                raise ValidationError(
                    f"/nodes/{i}/demand", "demand >= 0",
                    f"{node.demand} on node {node.id!r}",
                )
        elif node.kind == KIND_FIXED:
            if node.head is None or node.demand is not None:
                raise ValidationError(
                    f"/nodes/{i}", "fixed-head node with head only",
                    f"node {node.id!r} fields do not match kind",
                )
        else:
            raise ValidationError(
                f"/nodes/{i}/kind", "'demand' or 'fixed-head'", repr(node.kind)
            )

    ids = {n.id for n in nodes}
    seen_pipes = set()
    for j, pipe in enumerate(pipes):
        if pipe.id in seen_pipes:
            raise ValidationError(
                f"/pipes/{j}/id", "unique pipe id", f"duplicate id {pipe.id!r}"
            )
        seen_pipes.add(pipe.id)
        for key, endpoint in (("from", pipe.from_node), ("to", pipe.to_node)):
            if endpoint not in ids:
                raise ValidationError(
                    f"/pipes/{j}/{key}", "existing node id",
                    f"unknown node {endpoint!r} on pipe {pipe.id!r}",
                )
        if pipe.from_node == pipe.to_node:
            raise ValidationError(
                f"/pipes/{j}", "distinct endpoints",
                f"pipe {pipe.id!r} is a self-loop on {pipe.from_node!r}",
            )
        if not pipe.resistance > 0:
            raise ValidationError(
                f"/pipes/{j}/resistance", "resistance > 0",
                f"{pipe.resistance} on pipe {pipe.id!r}",
            )
        if not pipe.exponent > 1:
            raise ValidationError(
                f"/pipes/{j}/exponent", "exponent > 1",
                f"{pipe.exponent} on pipe {pipe.id!r}",
            )

    if not any(n.kind == KIND_FIXED for n in nodes):
        raise ValidationError("/nodes", "at least one fixed-head node", "none")
    if not any(n.kind == KIND_DEMAND for n in nodes):
        raise ValidationError("/nodes", "at least one demand node", "none")

    # Connectivity over the undirected graph.
    adjacency: dict[str, set[str]] = {n.id: set() for n in nodes}
    for pipe in pipes:
        adjacency[pipe.from_node].add(pipe.to_node)
        adjacency[pipe.to_node].add(pipe.from_node)
    start = nodes[0].id
    reached = {start}
    stack = [start]
    while stack:
        for neighbour in adjacency[stack.pop()]:
            if neighbour not in reached:
                reached.add(neighbour)
                stack.append(neighbour)
    if len(reached) < len(nodes):
        missing = sorted(ids - reached)
        raise ValidationError(
            "/pipes", "connected graph",
            f"unreachable node(s) {', '.join(repr(m) for m in missing)}",
        )
