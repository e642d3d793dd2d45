"""Exception and warning types shared across the toolkit."""


class DomainError(ValueError):
    """An argument lies outside the domain where the operation is defined."""


class ConvexityError(ValueError):
    """A function required to be convex or monotone is not."""


class CovarianceError(ValueError):
    """A covariance matrix is missing or cannot be clipped to PSD."""


class ClosedFormFallback(UserWarning):
    """A closed-form value was used because the discrete carrier cannot
    realize the requested set exactly."""


class DiagnosticWarning(UserWarning):
    """A numerical diagnostic (infinite norm detected, non-unit dual member...)."""
