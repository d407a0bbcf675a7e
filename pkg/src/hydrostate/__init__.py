"""Hydraulic network state estimation with interval error limits and a
growing fuzzy min-max anomaly classifier."""

from .errors import (
    DegenerateRange,
    EmptyModel,
    HydrostateError,
    NonConvergence,
    ParseError,
    PatternOutOfRange,
    PatternTooWide,
    RankDeficient,
    SchemaError,
    SingularSystem,
    UnknownTarget,
    ValidationError,
)
from .errorlimits import (
    IntervalState,
    monte_carlo_containment,
    sensitivity_bound,
    uncertainty_vector,
)
from .estimator import (
    AugmentedSystem,
    EstimateReport,
    Measurement,
    MeasurementSet,
    build_augmented,
    estimate_state,
)
from .fuzzy import (
    Cell,
    ClassificationResult,
    ClassifierModel,
    Pattern,
    classify,
    denormalize,
    membership,
    normalize,
    train,
    violation,
)
from .hydraulics import SolveReport, StateVector, residual, solve_steady_state
from .network import (
    Network,
    Node,
    Pipe,
    headloss_diagonal,
    incidence_matrices,
    parse_network,
)
from .scenarios import LabeledPattern, MeterSpec, ScenarioSpec, generate

__version__ = "0.1.0"

__all__ = [
    "AugmentedSystem",
    "Cell",
    "ClassificationResult",
    "ClassifierModel",
    "DegenerateRange",
    "EmptyModel",
    "EstimateReport",
    "HydrostateError",
    "IntervalState",
    "LabeledPattern",
    "Measurement",
    "MeasurementSet",
    "MeterSpec",
    "Network",
    "Node",
    "NonConvergence",
    "ParseError",
    "Pattern",
    "PatternOutOfRange",
    "PatternTooWide",
    "Pipe",
    "RankDeficient",
    "ScenarioSpec",
    "SchemaError",
    "SingularSystem",
    "SolveReport",
    "StateVector",
    "UnknownTarget",
    "ValidationError",
    "build_augmented",
    "classify",
    "denormalize",
    "estimate_state",
    "generate",
    "headloss_diagonal",
    "incidence_matrices",
    "membership",
    "monte_carlo_containment",
    "normalize",
    "parse_network",
    "residual",
    "sensitivity_bound",
    "solve_steady_state",
    "train",
    "uncertainty_vector",
    "violation",
]
