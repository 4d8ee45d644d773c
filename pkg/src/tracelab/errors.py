"""Exception types shared across the toolkit.

All subclass ValueError so callers that only know the standard library
can still catch them idiomatically.
"""


class TraceLabError(ValueError):
    """Base class for toolkit errors."""


class PreconditionError(TraceLabError):
    """An operation was called outside its stated domain."""


class FixtureError(TraceLabError):
    """A coefficient fixture failed to load or violates an invariant."""


class TruncationError(TraceLabError):
    """A truncated sum or integral could not meet its error budget."""


class UnsupportedCaseError(TraceLabError):
    """The requested (level, character) combination is not covered."""


class SingularSystemError(TraceLabError):
    """The coefficient matrix used to isolate forms is too ill-conditioned."""


class InvariantViolation(TraceLabError):
    """A mathematically guaranteed identity failed numerically."""
