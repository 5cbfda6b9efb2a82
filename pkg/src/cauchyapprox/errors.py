"""Exception hierarchy.

Every error carries a ``code`` that the command-line front end maps onto a
process exit status: validation problems exit with 2, numerical accuracy
problems with 3.
"""


class ApproxError(Exception):
    code = 1


class InvalidInputError(ApproxError, ValueError):
    """Malformed or out-of-contract input."""

    code = 2


class DomainError(ApproxError, ValueError):
    """Evaluation point outside the domain of a multivalued object."""

    code = 2


class AccuracyError(ApproxError, ArithmeticError):
    """A computed quantity failed its internal accuracy check."""

    code = 3

    def __init__(self, message: str, estimate=None):
        super().__init__(message)
        self.estimate = estimate


class ResolutionError(ApproxError, ArithmeticError):
    """Sampling too coarse to resolve a quantity (e.g. an argument jump)."""

    code = 3
