"""Exception hierarchy shared by every module of the package."""


class HareError(Exception):
    """Base class for all errors raised by :mod:`riccati_families`."""


class InvalidInput(HareError, ValueError):
    """Malformed data: non-finite entries, wrong shapes, asymmetric input..."""


class SingularInput(HareError, ValueError):
    """A matrix that must be inverted is singular under the rank tolerance."""


class PreconditionViolated(HareError, ValueError):
    """The input is well formed but does not satisfy an operation's hypothesis."""


class IndefiniteInnerTerm(HareError, ArithmeticError):
    """``R + B^T Q B`` is singular, so ``Q`` is outside the Riccati map's domain."""


class NumericalBreakdown(HareError, ArithmeticError):
    """A postcondition that holds in exact arithmetic failed numerically."""


class NoSteinSolution(HareError, ValueError):
    """The Stein equation has no solution, so no solution family exists."""
