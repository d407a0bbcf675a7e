import numpy as np
import pytest

from hydrostate import (
    Measurement,
    MeasurementSet,
    MeterSpec,
    ScenarioSpec,
    estimate_state,
    generate,
    sensitivity_bound,
    solve_steady_state,
    uncertainty_vector,
)

METERS = (
    MeterSpec("pipe-flow", "p1", sigma=0.01, delta=0.02),
    MeterSpec("pipe-flow", "p2", sigma=0.01, delta=0.02),
    MeterSpec("node-head", "n1", sigma=0.02, delta=0.05),
    MeterSpec("node-head", "n2", sigma=0.02, delta=0.05),
)


def _spec(**overrides):
    base = dict(
        counts=(("normal", 3), ("leak@n1", 2)),
        leak_magnitude=(0.5, 1.0),
        demand_noise=0.02,
        demand_sigma=0.05,
        meters=METERS,
        seed=11,
    )
    base.update(overrides)
    return ScenarioSpec(**base)


def test_zero_uncertainty_gives_crisp_pattern(triangle):
    crisp_meters = tuple(
        MeterSpec(m.kind, m.target, m.sigma, delta=0.0) for m in METERS
    )
    spec = _spec(
        counts=(("normal", 1),), demand_noise=0.0, meters=crisp_meters
    )
    patterns, manifest = generate(triangle, spec)
    assert len(patterns) == 1
    lp = patterns[0]
    assert lp.label == "normal"
    np.testing.assert_array_equal(lp.pattern.inf, lp.pattern.sup)


def test_determinism_bit_identical(triangle):
    first, manifest_a = generate(triangle, _spec())
    second, manifest_b = generate(triangle, _spec())
    assert manifest_a == manifest_b
    assert len(first) == len(second)
    for a, b in zip(first, second):
        assert a.label == b.label
        assert np.array_equal(a.pattern.inf, b.pattern.inf)
        assert np.array_equal(a.pattern.sup, b.pattern.sup)


def test_zero_magnitude_leak_matches_normal_stream(triangle):
    normal, _ = generate(triangle, _spec(counts=(("normal", 4),)))
    degenerate, _ = generate(
        triangle, _spec(counts=(("leak@n1", 4),), leak_magnitude=(0.0, 0.0))
    )
    for a, b in zip(normal, degenerate):
        assert a.label == "normal" and b.label == "leak@n1"
        np.testing.assert_array_equal(a.pattern.inf, b.pattern.inf)
        np.testing.assert_array_equal(a.pattern.sup, b.pattern.sup)


def test_label_balance_and_unit_cube(triangle):
    spec = _spec(counts=(("normal", 5), ("leak@n1", 3), ("leak@n2", 4)))
    patterns, manifest = generate(triangle, spec)
    counts = {}
    for lp in patterns:
        counts[lp.label] = counts.get(lp.label, 0) + 1
        assert np.all(lp.pattern.inf >= 0.0) and np.all(lp.pattern.sup <= 1.0)
        assert np.all(lp.pattern.inf <= lp.pattern.sup)
    assert counts == {"normal": 5, "leak@n1": 3, "leak@n2": 4}
    assert manifest["classes"] == counts
    assert manifest["failures"] == []
    assert len(manifest["normalization"]) == triangle.n_pipes + triangle.n_demand
    assert manifest["features"][0] == "q:p1"


def test_leak_separates_from_normal_beyond_halfwidth(triangle):
    """A 20%-of-total-demand leak moves the estimate outside the
    normal-condition error box in at least one component."""
    meas_specs = METERS
    demand_delta = tuple(0.01 * triangle.demand)

    def pipeline(net_for_truth):
        truth = solve_steady_state(net_for_truth).state
        meas = MeasurementSet(
            tuple(
                Measurement(
                    m.kind,
                    m.target,
                    value=float(
                        truth.q[triangle.pipe_index(m.target)]
                        if m.kind == "pipe-flow"
                        else truth.H[triangle.demand_index(m.target)]
                    ),
                    sigma=m.sigma,
                    delta=m.delta,
                )
                for m in meas_specs
            ),
            demand_sigma=0.05,
            demand_delta=demand_delta,
        )
        x_star = estimate_state(triangle, meas).state
        interval = sensitivity_bound(
            triangle, meas, x_star, uncertainty_vector(triangle, meas)
        )
        return interval

    normal = pipeline(triangle)
    leak_demands = triangle.demand.copy()
    leak_demands[0] += 0.2 * triangle.demand.sum()
    leaky = pipeline(triangle.with_demands(leak_demands))

    gap = np.abs(leaky.center.vector - normal.center.vector)
    assert np.any(gap > normal.halfwidth)


def test_failed_scenarios_are_recorded(triangle):
    # demand noise > 100% drives some true demands negative, which the
    # network model rejects; those scenarios must be skipped and counted.
    spec = _spec(counts=(("normal", 12),), demand_noise=1.5, seed=3)
    patterns, manifest = generate(triangle, spec)
    assert len(patterns) + len(manifest["failures"]) == 12
    assert len(manifest["failures"]) >= 1
    assert all(f["error"] for f in manifest["failures"])


def test_unknown_leak_node_rejected(triangle):
    with pytest.raises(ValueError):
        generate(triangle, _spec(counts=(("leak@zz", 1),)))


def test_unknown_meter_rejected(triangle):
    bad = (MeterSpec("pipe-flow", "nope", 0.01, 0.0),)
    with pytest.raises(ValueError):
        generate(triangle, _spec(meters=bad))


def test_spec_validation():
    with pytest.raises(ValueError):
        _spec(leak_magnitude=(2.0, 1.0))
    with pytest.raises(ValueError):
        _spec(counts=(("normal", 0),))
    with pytest.raises(ValueError):
        _spec(counts=(("weird-label", 1),))
    with pytest.raises(ValueError):
        _spec(demand_noise=-0.1)
