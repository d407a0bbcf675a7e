"""Synthetic labeled patterns from the solve / estimate / bound chain.

The solver stands in for the real system: each scenario perturbs the true
demands (and, for leak classes, injects extra demand at the leak node),
forward-solves the true state, meters it at the configured points, and then
estimates the state from the *nominal* demand predictions plus that
telemetry. The resulting interval state, normalized over the generated
dataset's padded min/max ranges, becomes one labeled training pattern.
"""

from dataclasses import dataclass

import numpy as np

from .errors import HydrostateError
from .estimator import Measurement, MeasurementSet, estimate_state
from .errorlimits import sensitivity_bound, uncertainty_vector
from .fuzzy import Pattern, normalize
from .hydraulics import solve_steady_state
from .network import Network

NORMAL_LABEL = "normal"
LEAK_PREFIX = "leak@"

RANGE_PADDING = 0.05


@dataclass(frozen=True)
class MeterSpec:
    kind: str
    target: str
    sigma: float
    delta: float


@dataclass(frozen=True)
class ScenarioSpec:
    """Recipe for one labeled dataset.

    `counts` maps class labels ("normal" or "leak@<node-id>") to scenario
    counts; the leak node set is implied by the keys. Leak magnitudes are
    drawn uniformly from `leak_magnitude`, true demands are perturbed by a
    uniform relative noise of `demand_noise`, and the same fraction is
    assumed as the demand-prediction error bound.
    """

    counts: tuple[tuple[str, int], ...]
    leak_magnitude: tuple[float, float]
    demand_noise: float
    demand_sigma: float
    meters: tuple[MeterSpec, ...]
    seed: int

    def __post_init__(self):
        # Canonical label order: the scenario schedule (and with it the
        # per-scenario randomness) must not depend on JSON key order.
        object.__setattr__(
            self,
            "counts",
            tuple(sorted((str(k), int(v)) for k, v in self.counts)),
        )
        object.__setattr__(self, "meters", tuple(self.meters))
        lo, hi = self.leak_magnitude
        if lo < 0 or hi < lo:
            raise ValueError(f"leak magnitude range must satisfy 0 <= lo <= hi, got {self.leak_magnitude}")
        if any(count < 1 for _, count in self.counts):
            raise ValueError("per-class counts must be >= 1")
        if self.demand_noise < 0:
            raise ValueError("demand_noise must be >= 0")
        for label, _ in self.counts:
            if label != NORMAL_LABEL and not label.startswith(LEAK_PREFIX):
                raise ValueError(f"unknown class label {label!r}")


@dataclass(frozen=True)
class LabeledPattern:
    pattern: Pattern
    label: str


def generate(net: Network, spec: ScenarioSpec) -> tuple[list[LabeledPattern], dict]:
    """Labeled patterns plus a dataset manifest.

    Deterministic: scenario k draws all its randomness from
    (spec.seed, k). Scenarios that fail to solve or estimate are skipped
    and recorded in the manifest. Normalization ranges are the min/max of
    the generated interval bounds, padded on both sides.
    """
    for label, _ in spec.counts:
        if label.startswith(LEAK_PREFIX):
            node = label[len(LEAK_PREFIX):]
            if not net.has_demand_node(node):
                raise ValueError(f"leak class {label!r} names unknown demand node {node!r}")
    for meter in spec.meters:
        if meter.kind == "pipe-flow" and not net.has_pipe(meter.target):
            raise ValueError(f"metered pipe {meter.target!r} not in network")
        if meter.kind == "node-head" and not net.has_demand_node(meter.target):
            raise ValueError(f"metered node {meter.target!r} not in network")

    schedule = [
        label for label, count in spec.counts for _ in range(count)
    ]
    demand_delta = tuple(spec.demand_noise * net.demand)

    intervals = []
    labels = []
    failures = []
    for index, label in enumerate(schedule):
        rng = np.random.default_rng((spec.seed, index))
        noise = rng.uniform(-1.0, 1.0, net.n_demand)
        magnitude = rng.uniform(spec.leak_magnitude[0], spec.leak_magnitude[1])

        true_demands = net.demand * (1.0 + spec.demand_noise * noise)
        if label.startswith(LEAK_PREFIX):
            true_demands = true_demands.copy()
            true_demands[net.demand_index(label[len(LEAK_PREFIX):])] += magnitude

        try:
            true_net = net.with_demands(true_demands)
            truth = solve_steady_state(true_net).state
            meas = MeasurementSet(
                tuple(
                    Measurement(
                        m.kind,
                        m.target,
                        value=_metered_value(net, truth, m),
                        sigma=m.sigma,
                        delta=m.delta,
                    )
                    for m in spec.meters
                ),
                demand_sigma=spec.demand_sigma,
                demand_delta=demand_delta,
            )
            estimate = estimate_state(net, meas)
            interval = sensitivity_bound(
                net, meas, estimate.state, uncertainty_vector(net, meas)
            )
        except HydrostateError as exc:
            failures.append({"index": index, "label": label, "error": type(exc).__name__})
            continue

        intervals.append(interval)
        labels.append(label)

    if not intervals:
        raise ValueError("every scenario failed; nothing to normalize")

    ranges = _dataset_ranges(intervals)
    patterns = [
        LabeledPattern(normalize(interval, ranges), label)
        for interval, label in zip(intervals, labels)
    ]

    generated: dict[str, int] = {}
    for label in labels:
        generated[label] = generated.get(label, 0) + 1
    manifest = {
        "classes": generated,
        "requested": {label: count for label, count in spec.counts},
        "failures": failures,
        "normalization": [[float(lo), float(hi)] for lo, hi in ranges],
        "seed": spec.seed,
        "features": [f"q:{p.id}" for p in net.pipes]
        + [f"H:{n.id}" for n in net.demand_nodes],
    }
    return patterns, manifest


def _metered_value(net: Network, state, meter: MeterSpec) -> float:
    if meter.kind == "pipe-flow":
        return float(state.q[net.pipe_index(meter.target)])
    return float(state.H[net.demand_index(meter.target)])


def _dataset_ranges(intervals) -> np.ndarray:
    lowers = np.stack([iv.lower for iv in intervals])
    uppers = np.stack([iv.upper for iv in intervals])
    lo = lowers.min(axis=0)
    hi = uppers.max(axis=0)
    span = hi - lo
    pad = RANGE_PADDING * span
    # Constant dimensions still need a strictly positive range.
    flat = span == 0
    pad[flat] = np.maximum(1e-9, 1e-6 * np.maximum(1.0, np.abs(lo[flat])))
    return np.column_stack([lo - pad, hi + pad])
