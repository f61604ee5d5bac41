class SingularPointError(ValueError):
    """Pointwise evaluation requested at (or too close to) the origin."""


class SingularityError(ValueError):
    """A radial primitive diverges, so the gauge construction is not available."""


class OutOfRangeError(ValueError):
    """Radial evaluation outside the working shell."""


class VerificationError(AssertionError):
    """A numerical verification did not meet its tolerance."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report
