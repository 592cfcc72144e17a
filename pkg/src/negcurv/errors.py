"""Exception hierarchy shared by all modules."""


class NegcurvError(Exception):
    """Base class for every error raised by this package."""


class InputError(NegcurvError, ValueError):
    """Malformed input: bad dimensions, schema violations, singular maps."""


class DomainError(InputError):
    """Argument outside the domain of the operation (e.g. a zero vector)."""


class NotSolvableError(InputError):
    """The algebra is not solvable, so the Heintze pipeline does not apply."""


class NotNilpotentError(NegcurvError):
    """The descending sequence of the derived algebra never reaches zero."""


class InvarianceError(NegcurvError):
    """A subspace is not invariant under the adjoint action used."""


class NumericalError(NegcurvError, ArithmeticError):
    """A numerical routine failed to converge."""

    def __init__(self, message, **context):
        super().__init__(message)
        self.context = context


class StrongConvexityError(NumericalError):
    """A fundamental tensor is not positive definite."""


class NotApplicableError(NegcurvError):
    """Hypotheses of a formula are violated beyond tolerance."""

    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = dict(residuals or {})
