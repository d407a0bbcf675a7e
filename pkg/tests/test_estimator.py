import numpy as np
import pytest

from hydrostate import (
    Measurement,
    MeasurementSet,
    RankDeficient,
    UnknownTarget,
    build_augmented,
    estimate_state,
    solve_steady_state,
)
from hydrostate.estimator import linearized_system, weighted_step
from hydrostate.hydraulics import initial_state

from helpers import exact_measurements, random_network


def test_flow_measurement_selector_row(triangle):
    meas = MeasurementSet((Measurement("pipe-flow", "p1", 2.0, 0.1),))
    aug = build_augmented(triangle, meas)
    assert aug.flow_selector.tolist() == [[1.0, 0.0, 0.0]]
    assert aug.head_selector.tolist() == [[0.0, 0.0]]


def test_head_measurement_selector_row(triangle):
    meas = MeasurementSet((Measurement("node-head", "n2", 60.0, 0.1),))
    aug = build_augmented(triangle, meas)
    assert aug.flow_selector.tolist() == [[0.0, 0.0, 0.0]]
    assert aug.head_selector.tolist() == [[0.0, 1.0]]


def test_empty_measurements_reduce_to_model_rows(triangle):
    aug = build_augmented(triangle, MeasurementSet())
    assert aug.n_telemetry == 0
    assert aug.weights.shape == (triangle.n_pipes + triangle.n_demand,)


def test_unknown_target(triangle):
    meas = MeasurementSet((Measurement("pipe-flow", "nope", 1.0, 0.1),))
    with pytest.raises(UnknownTarget):
        build_augmented(triangle, meas)


def test_consistent_data_fixed_point(triangle):
    meas, truth = exact_measurements(triangle, seed=0)
    report = estimate_state(triangle, meas)
    assert report.converged
    diff = np.max(np.abs(report.state.vector - truth.state.vector))
    assert diff <= 1e-6


def test_no_telemetry_matches_forward_solve(triangle):
    forward = solve_steady_state(triangle)
    estimate = estimate_state(triangle, MeasurementSet(demand_sigma=0.5))
    diff = np.max(np.abs(estimate.state.vector - forward.state.vector))
    assert diff <= 1e-6


@pytest.mark.parametrize("seed", range(4))
def test_consistent_data_random_weights(seed):
    net = random_network(seed, n_nodes=12)
    meas, truth = exact_measurements(net, seed=seed, random_weights=True)
    report = estimate_state(net, meas)
    diff = np.max(np.abs(report.state.vector - truth.state.vector))
    assert diff <= 1e-5


def test_biased_measurement_pulls_estimate(triangle):
    """A heavily weighted biased flow meter wins over the demand rows."""
    truth = solve_steady_state(triangle).state
    biased_value = 1.05 * truth.q[0]
    meas = MeasurementSet(
        (Measurement("pipe-flow", "p1", float(biased_value), sigma=1e-4),),
        demand_sigma=10.0,
    )
    estimate = estimate_state(triangle, meas).state
    err_to_measured = abs(estimate.q[0] - biased_value) / abs(biased_value)
    err_to_truth = abs(estimate.q[0] - truth.q[0]) / abs(truth.q[0])
    assert err_to_measured < err_to_truth


def test_weight_scaling_invariance(triangle):
    meas, _ = exact_measurements(triangle, seed=3)
    base = estimate_state(triangle, meas)

    alpha = 37.0  # scale W by alpha: divide every sigma by sqrt(alpha)
    shrink = 1.0 / np.sqrt(alpha)
    scaled_meas = MeasurementSet(
        tuple(
            Measurement(m.kind, m.target, m.value, m.sigma * shrink, m.delta)
            for m in meas.measurements
        ),
        demand_sigma=meas.demand_sigma * shrink,
    )
    scaled = estimate_state(
        triangle, scaled_meas, energy_sigma=1e-4 * shrink
    )
    diff = np.max(np.abs(scaled.state.vector - base.state.vector))
    assert diff <= 1e-10


def test_step_solves_normal_equations(triangle):
    """Accepted steps satisfy the weighted normal equations to a tiny
    scaled backward error."""
    meas, _ = exact_measurements(triangle, seed=1)
    aug = build_augmented(triangle, meas)
    x = initial_state(triangle)
    for _ in range(3):
        matrix, weights, rhs = linearized_system(triangle, aug, x)
        dx = weighted_step(matrix, weights, rhs)
        gram = matrix.T @ (matrix * weights[:, None])
        b = (matrix * weights[:, None]).T @ rhs
        backward = np.max(np.abs(gram @ dx - b))
        scale = np.max(np.abs(gram)) * max(np.max(np.abs(dx)), 1e-30) + np.max(
            np.abs(b)
        )
        assert backward / scale <= 1e-10
        x = type(x)(x.q + dx[: triangle.n_pipes], x.H + dx[triangle.n_pipes :])


def test_rank_deficient_normal_equations():
    matrix = np.array([[1.0, 0.0], [1.0, 0.0], [2.0, 0.0]])
    with pytest.raises(RankDeficient):
        weighted_step(matrix, np.ones(3), np.ones(3))


def test_omega_range_checked(triangle):
    with pytest.raises(ValueError):
        estimate_state(triangle, MeasurementSet(), omega=2.0)


def test_under_relaxation_same_answer(triangle):
    meas, truth = exact_measurements(triangle, seed=5)
    relaxed = estimate_state(triangle, meas, omega=0.7, max_iter=200)
    assert relaxed.converged
    diff = np.max(np.abs(relaxed.state.vector - truth.state.vector))
    assert diff <= 1e-6


@pytest.mark.parametrize("seed", range(5))
def test_idempotence_over_random_weights(triangle, seed):
    """Exact data is recovered for any positive weight diagonal."""
    rng = np.random.default_rng((303, seed))
    truth = solve_steady_state(triangle).state
    measurements = (
        Measurement("pipe-flow", "p1", float(truth.q[0]), float(rng.uniform(0.01, 2.0))),
        Measurement("node-head", "n2", float(truth.H[1]), float(rng.uniform(0.01, 2.0))),
    )
    meas = MeasurementSet(
        measurements, demand_sigma=float(rng.uniform(0.01, 2.0))
    )
    report = estimate_state(triangle, meas)
    assert np.max(np.abs(report.state.vector - truth.vector)) <= 1e-6


def test_step_norm_convergence_flag(triangle):
    meas, _ = exact_measurements(triangle, seed=2)
    report = estimate_state(triangle, meas)
    assert report.converged
    assert report.step_norms[-1] <= 1e-8
