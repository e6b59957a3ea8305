"""Exception types shared across the package."""


class FuzzyTrustError(Exception):
    """Base class for all package-specific errors."""


class MissingInputError(FuzzyTrustError):
    """An inference call omitted one or more declared input variables."""


class DegenerateOutputError(FuzzyTrustError):
    """No rule fired: the aggregated output has zero area, so no crisp
    value exists.  Raised instead of returning an arbitrary default."""


class EmptyDataError(FuzzyTrustError):
    """A data matrix with zero rows was supplied."""


class TooFewPointsError(FuzzyTrustError):
    """Fewer data points than requested clusters."""


class NonFiniteDataError(FuzzyTrustError):
    """NaN or infinity found in input data."""


class InvalidModelError(FuzzyTrustError):
    """A cluster model has the wrong shape for the requested operation."""


class ZeroTotalRequestsError(FuzzyTrustError):
    """Trust is undefined for a user with no requests in the window."""


class IncompletePolicyError(FuzzyTrustError):
    """A rule completion policy failed to cover the full input lattice."""


class OutOfRangeError(FuzzyTrustError):
    """A scalar argument fell outside its documented domain."""


class ParseError(FuzzyTrustError):
    """A malformed input file row.  Carries the 1-based line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class EmptyWindowError(FuzzyTrustError):
    """No log entries fell inside the requested time window."""


class InvalidSpecError(FuzzyTrustError):
    """A corpus specification violates its invariants."""


class NotFoundError(FuzzyTrustError):
    """No record stored for the requested subject."""


class StoreCorruptError(FuzzyTrustError):
    """The trust store contains an unreadable line."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class EmptyTestSetError(FuzzyTrustError):
    """An evaluation was requested over zero samples."""


class LengthMismatchError(FuzzyTrustError):
    """Truth and prediction sequences differ in length."""


class NoTrustAvailableError(FuzzyTrustError):
    """A decision was requested for a subject with no stored trust and
    no fresh behavior counters."""


class ModelLoadFailureError(FuzzyTrustError):
    """A model artifact is missing or partial; the service refuses to start."""


class BindFailureError(FuzzyTrustError):
    """The service could not bind its listen address."""
