"""Exception hierarchy.

Every library error derives from :class:`RadopError`.  The CLI maps the three
families below onto its exit codes (precondition 2, numeric 3).
"""


class RadopError(Exception):
    pass


class PreconditionError(RadopError, ValueError):
    """An argument violates a documented precondition."""


class NumericFailure(RadopError, ArithmeticError):
    """A numerical procedure could not reach its target."""


class DimensionMismatch(PreconditionError):
    pass


class NotMember(PreconditionError, KeyError):
    pass


class NotAllowable(PreconditionError):
    """A multi-index outside the allowable set was used."""


class NotUnimodular(PreconditionError):
    pass


class OutsideDomain(PreconditionError):
    pass


class OutsideTildeDomain(PreconditionError):
    pass


class IncompatibleIndexSets(PreconditionError):
    pass


class SpaceMismatch(PreconditionError):
    pass


class OutOfRange(PreconditionError, IndexError):
    """Sampled symbol queried outside its box with the ``error`` extension."""


class UnboundedSymbol(PreconditionError):
    pass


class ResolutionExceeded(NumericFailure):
    pass


class UndecidableFiniteness(NumericFailure):
    """The numeric divergence test could not certify either outcome."""


class BudgetExhausted(NumericFailure):
    pass


class NonFinite(NumericFailure):
    pass


class QuadratureFailure(NumericFailure):
    pass


class NoConvergence(NumericFailure):
    pass
