"""Telemetry-augmented weighted least-squares state estimation.

Telemetry rows extend the steady-state system with unit selector rows
picking the measured flow or head, turning it into an overdetermined
system. Estimation iterates the linearization at the current
iterate: the correction solves

    min || W^(1/2) (A_k dx - rhs_k) ||_2,    x <- x + omega * dx,

where A_k carries the derivative diagonal in its energy block and rhs_k is
the negated augmented residual. Row weights are 1/sigma^2 per row class:
energy rows use a small near-exact sigma, continuity rows the demand sigma,
telemetry rows their per-measurement sigma.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import NonConvergence, RankDeficient, UnknownTarget
from .hydraulics import (
    StateVector,
    initial_state,
    jacobian_coefficients,
    residual,
)
from .network import Network, incidence_matrices

KIND_PIPE_FLOW = "pipe-flow"
KIND_NODE_HEAD = "node-head"

# Energy rows model exact physics; a small sigma keeps them dominant while
# preserving one uniform least-squares path.
ENERGY_SIGMA = 1e-4

DEFAULT_TOL_X = 1e-8
DEFAULT_MAX_ITER = 50
DEFAULT_OMEGA = 1.0


@dataclass(frozen=True)
class Measurement:
    kind: str
    target: str
    value: float
    sigma: float
    delta: float = 0.0

    def __post_init__(self):
        if self.kind not in (KIND_PIPE_FLOW, KIND_NODE_HEAD):
            raise ValueError(f"unknown measurement kind {self.kind!r}")
        if not self.sigma > 0:
            raise ValueError(f"sigma must be > 0, got {self.sigma}")
        if self.delta < 0:
            raise ValueError(f"delta must be >= 0, got {self.delta}")


@dataclass(frozen=True)
class MeasurementSet:
    measurements: tuple[Measurement, ...] = ()
    demand_sigma: float = 1.0
    demand_delta: tuple[float, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "measurements", tuple(self.measurements))
        if not self.demand_sigma > 0:
            raise ValueError(f"demand_sigma must be > 0, got {self.demand_sigma}")
        if self.demand_delta is not None:
            dd = tuple(float(v) for v in self.demand_delta)
            if any(v < 0 for v in dd):
                raise ValueError("demand_delta entries must be >= 0")
            object.__setattr__(self, "demand_delta", dd)

    def demand_delta_vector(self, net: Network) -> np.ndarray:
        if self.demand_delta is None:
            return np.zeros(net.n_demand)
        dd = np.asarray(self.demand_delta, dtype=float)
        if dd.shape != (net.n_demand,):
            raise ValueError(
                f"demand_delta has length {dd.shape[0]}, expected {net.n_demand}"
            )
        return dd


@dataclass
class AugmentedSystem:
    """Telemetry blocks plus the diagonal weights of all rows.

    Row layout everywhere is (energy | continuity | telemetry); `weights`
    holds the diagonal of W in that order and `values` the telemetry
    right-hand sides M_t.
    """

    flow_selector: np.ndarray
    head_selector: np.ndarray
    values: np.ndarray
    weights: np.ndarray

    @property
    def n_telemetry(self) -> int:
        return self.flow_selector.shape[0]


@dataclass
class EstimateReport:
    state: StateVector
    iterations: int
    weighted_residual_norm: float
    converged: bool
    step_norms: list[float] = field(default_factory=list)


def build_augmented(
    net: Network, meas: MeasurementSet, *, energy_sigma: float = ENERGY_SIGMA
) -> AugmentedSystem:
    """Selector rows and row weights for a measurement set.

    A pipe-flow measurement on pipe j gets a unit row selecting q_j; a
    node-head measurement on node i gets a unit row selecting H_i.
    """
    m = len(meas.measurements)
    flow_selector = np.zeros((m, net.n_pipes))
    head_selector = np.zeros((m, net.n_demand))
    values = np.zeros(m)
    sigmas = np.zeros(m)
    for k, measurement in enumerate(meas.measurements):
        if measurement.kind == KIND_PIPE_FLOW:
            if not net.has_pipe(measurement.target):
                raise UnknownTarget(measurement.target)
            flow_selector[k, net.pipe_index(measurement.target)] = 1.0
        else:
            if not net.has_demand_node(measurement.target):
                raise UnknownTarget(measurement.target)
            head_selector[k, net.demand_index(measurement.target)] = 1.0
        values[k] = measurement.value
        sigmas[k] = measurement.sigma

    row_sigmas = np.concatenate(
        [
            np.full(net.n_pipes, energy_sigma),
            np.full(net.n_demand, meas.demand_sigma),
            sigmas,
        ]
    )
    with np.errstate(divide="ignore", over="ignore"):
        weights = 1.0 / row_sigmas**2
    if not np.isfinite(weights).all():
        raise ValueError("a sigma is too small: its weight 1/sigma^2 overflows")
    return AugmentedSystem(flow_selector, head_selector, values, weights)


def augmented_residual(net: Network, aug: AugmentedSystem, x: StateVector) -> np.ndarray:
    """(energy | continuity | telemetry) residual at x; telemetry rows are
    selected state minus measured value."""
    telemetry = aug.flow_selector @ x.q + aug.head_selector @ x.H - aug.values
    return np.concatenate([residual(net, x), telemetry])


def linearized_system(
    net: Network, aug: AugmentedSystem, x: StateVector
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Matrix, weight diagonal and right-hand side of the linearized
    augmented system at x. The rhs is the negated augmented residual."""
    a12, _ = incidence_matrices(net)
    n_p = net.n_demand
    matrix = np.vstack(
        [
            np.hstack([np.diag(jacobian_coefficients(net, x.q)), a12]),
            np.hstack([a12.T, np.zeros((n_p, n_p))]),
            np.hstack([aug.flow_selector, aug.head_selector]),
        ]
    )
    return matrix, aug.weights, -augmented_residual(net, aug, x)


def weighted_step(matrix: np.ndarray, weights: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve the weighted normal equations (A^T W A) dx = A^T W rhs.

    Uses a Cholesky factorization as the positive-definiteness gate; a
    failed factorization signals an unobservable configuration.
    """
    weighted_rows = matrix * weights[:, None]
    gram = matrix.T @ weighted_rows
    b = weighted_rows.T @ rhs
    try:
        lower = np.linalg.cholesky(gram)
    except np.linalg.LinAlgError as exc:
        raise RankDeficient("normal equations are not positive definite") from exc
    z = np.linalg.solve(lower, b)
    dx = np.linalg.solve(lower.T, z)
    if not np.isfinite(dx).all():
        raise RankDeficient("weighted step produced non-finite entries")
    return dx


def estimate_state(
    net: Network,
    meas: MeasurementSet,
    *,
    tol_x: float = DEFAULT_TOL_X,
    max_iter: int = DEFAULT_MAX_ITER,
    omega: float = DEFAULT_OMEGA,
    energy_sigma: float = ENERGY_SIGMA,
) -> EstimateReport:
    """Iterative weighted least-squares estimate of the network state.

    Stops when the correction max-norm drops to tol_x. omega is the
    relaxation factor applied to each accepted correction, in (0, 1.5].
    """
    if not 0 < omega <= 1.5:
        raise ValueError(f"omega must be in (0, 1.5], got {omega}")
    aug = build_augmented(net, meas, energy_sigma=energy_sigma)
    x = initial_state(net)
    step_norms: list[float] = []

    for iteration in range(1, max_iter + 1):
        matrix, weights, rhs = linearized_system(net, aug, x)
        dx = weighted_step(matrix, weights, rhs)
        x = StateVector(
            x.q + omega * dx[: net.n_pipes], x.H + omega * dx[net.n_pipes :]
        )
        step_norm = float(np.max(np.abs(dx))) if dx.size else 0.0
        step_norms.append(step_norm)
        if step_norm <= tol_x:
            weighted_norm = _weighted_norm(net, aug, x)
            return EstimateReport(x, iteration, weighted_norm, True, step_norms)

    raise NonConvergence(max_iter, step_norms[-1])


def _weighted_norm(net: Network, aug: AugmentedSystem, x: StateVector) -> float:
    r = augmented_residual(net, aug, x)
    return float(np.sqrt(np.sum(aug.weights * r**2)))
