"""Exception hierarchy shared by every module.

The CLI maps these onto exit codes: :class:`ParameterError` and
:class:`DomainError` give 2, :class:`ConvergenceError` gives 3.
"""


class PFQError(Exception):
    """Base class for all errors raised by :mod:`pfq`."""


class ParameterError(PFQError, ValueError):
    """Malformed input, e.g. a denominator parameter at a nonpositive integer."""


class DomainError(PFQError, ValueError):
    """Input outside the region where an evaluator or identity is valid."""


class PoleError(DomainError):
    """Gamma evaluated at a nonpositive integer."""


class RangeError(PFQError, ArithmeticError):
    """A result magnitude is not representable."""


class ConvergenceError(PFQError, ArithmeticError):
    """A series or quadrature failed to meet its stopping rule."""
