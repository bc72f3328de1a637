"""Exception types raised across the package."""


class VirialBoundsError(Exception):
    """Base class for all errors raised by this package."""


# formal series
class ZeroConstantTerm(VirialBoundsError, ZeroDivisionError):
    pass


class NonzeroInnerConstant(VirialBoundsError, ValueError):
    pass


class ConstantTermNotOne(VirialBoundsError, ValueError):
    pass


class IndexOutOfRange(VirialBoundsError, IndexError):
    pass


class NotInvertibleForm(VirialBoundsError, ValueError):
    pass


# trees
class TooLarge(VirialBoundsError, ValueError):
    pass


class LabelCollision(VirialBoundsError, ValueError):
    pass


class InvalidDegreeSequence(VirialBoundsError, ValueError):
    pass


class InvalidTree(VirialBoundsError, ValueError):
    pass


# potentials
class NotTempered(VirialBoundsError, ValueError):
    pass


class DegenerateSampler(VirialBoundsError, ValueError):
    pass


# numerical bounds
class OutOfDomain(VirialBoundsError, ValueError):
    pass


class InvalidG2(VirialBoundsError, ValueError):
    pass


class NoInteriorMax(VirialBoundsError, ArithmeticError):
    pass


class NoConvergence(VirialBoundsError, ArithmeticError):
    pass


class PreconditionViolated(VirialBoundsError, ValueError):
    pass


class ZeroCoefficient(VirialBoundsError, ZeroDivisionError):
    pass


class InsufficientCoefficients(VirialBoundsError, ValueError):
    pass


class TruncationInsufficient(VirialBoundsError, ArithmeticError):
    pass


class DomainEmpty(VirialBoundsError, ValueError):
    pass
