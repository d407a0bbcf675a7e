"""Exception types shared across the package.

Every domain failure raised by the library derives from HydrostateError so
the CLI can map it to a machine-readable error report with exit status 1.
"""


class HydrostateError(Exception):
    """Base class for all domain errors."""


class ParseError(HydrostateError):
    """Input text is not well-formed (e.g. invalid JSON)."""


class SchemaError(HydrostateError):
    """A document violates its schema at a specific location.

    `path` is a JSON-pointer-style string naming the offending field.
    """

    def __init__(self, path: str, expected: str, found: str):
        self.path = path
        self.expected = expected
        self.found = found
        super().__init__(f"{path}: expected {expected}, found {found}")


class ValidationError(SchemaError):
    """A structurally well-formed document violates a domain invariant.

    Subclasses SchemaError so decoders report every rejection with a
    located path, whether the problem is shape-level or semantic.
    """


class UnknownTarget(HydrostateError):
    """A measurement names a pipe or node that does not exist."""

    def __init__(self, target: str):
        self.target = target
        super().__init__(f"unknown measurement target {target!r}")


class NonConvergence(HydrostateError):
    """Iteration budget exhausted before meeting the tolerance."""

    def __init__(self, iterations: int, residual: float):
        self.iterations = iterations
        self.residual = residual
        super().__init__(
            f"no convergence after {iterations} iterations (residual {residual:.3e})"
        )


class SingularSystem(HydrostateError):
    """The linearized block system is rank-deficient."""


class RankDeficient(HydrostateError):
    """The weighted normal equations are not positive definite."""


class PatternOutOfRange(HydrostateError):
    """A training pattern has coordinates outside the unit cube."""


class PatternTooWide(HydrostateError):
    """A pattern interval is wider than the maximum cell size theta."""


class EmptyModel(HydrostateError):
    """Classification requested on a model with no cells."""


class DegenerateRange(HydrostateError):
    """A normalization range has hi <= lo."""

    def __init__(self, dimension: int):
        self.dimension = dimension
        super().__init__(f"degenerate normalization range in dimension {dimension}")
