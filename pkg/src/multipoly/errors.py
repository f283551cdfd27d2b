"""Exception types raised across the package."""


class MultipolyError(ValueError):
    """Base class for all contract violations."""


class LengthMismatch(MultipolyError):
    pass


class NonFiniteCoefficient(MultipolyError):
    pass


class ArityMismatch(MultipolyError):
    pass


class DimensionMismatch(MultipolyError):
    pass


class InvalidPermutation(MultipolyError):
    pass


class ShapeTooLarge(MultipolyError):
    pass


class ShapeMismatch(MultipolyError):
    pass


class NotAMultipolynomial(MultipolyError):
    """The black-box evaluator disagrees with its reconstructed tensor."""


class HeterogeneousBlocks(MultipolyError):
    pass


class GroupTooLarge(MultipolyError):
    pass


class BudgetExceeded(MultipolyError):
    pass


class EmptySamples(MultipolyError):
    pass


class ExponentMismatch(MultipolyError):
    pass
