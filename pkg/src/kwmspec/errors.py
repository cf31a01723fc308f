"""Exception types shared across the library."""


class DomainError(ValueError):
    """An input violates a documented precondition."""


class NumericError(RuntimeError):
    """A numerical routine failed to produce a trustworthy result."""


class ValidationFailure(DomainError):
    """An operation refused input that fails a validity check.

    The offending report is attached as ``report`` so callers can inspect
    margins and certificates.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class SpectrumDesignError(DomainError):
    """A design recipe was fed covariance fields that fail the uncertainty
    check; ``points`` lists the offending dual points."""

    def __init__(self, message, points=()):
        super().__init__(message)
        self.points = list(points)
