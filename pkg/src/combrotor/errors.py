"""Exception hierarchy shared by every module of the package."""


class CombError(Exception):
    """Base class for all errors raised by combrotor."""


class InvalidRotorError(CombError):
    """A rotor direction does not point at an existing neighbour."""


class SinkToppleError(CombError):
    """Attempt to topple a sink vertex."""


class IllegalToppleError(CombError):
    """Legal-mode toppling of a vertex that holds no particle."""


class BudgetExceededError(CombError):
    """A walk or aggregation exceeded its toppling budget."""


class DomainError(CombError, ValueError):
    """An argument lies outside the domain of an operation."""


class DegenerateProfileError(DomainError):
    """A tooth-height profile vanishes where the recursion divides by it."""


class FormulaConsistencyError(CombError):
    """A closed-form branch produced a non-integral value."""


class TheoremContradictionError(CombError):
    """A computed sequence violates a property that is proven to hold."""
