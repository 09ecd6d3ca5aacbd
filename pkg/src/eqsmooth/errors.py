"""Exception hierarchy shared by all modules."""


class EqSmoothError(Exception):
    pass


class DimensionMismatch(EqSmoothError, ValueError):
    pass


class ComplexError(EqSmoothError, ValueError):
    """Raised when a complex violates a structural precondition."""


class SimplexNotInComplex(ComplexError, KeyError):
    pass


class PointOutsideComplex(ComplexError):
    pass


class NotASubdivision(ComplexError):
    pass


class DegenerateSimplex(ComplexError):
    pass


class NonPureComplex(ComplexError):
    pass


class ActionError(EqSmoothError):
    """A group action (or a set of PL maps) fails its invariants."""


class GroupTooLarge(ActionError):
    pass


class EdgewiseCanonicalizationError(ActionError):
    pass


class ConvergenceError(EqSmoothError):
    pass


class UnsupportedDimension(EqSmoothError, ValueError):
    pass


class EvaluationError(EqSmoothError, ValueError):
    """Numeric evaluation left its stated domain (coarse subdivision, bad input)."""


class CoverError(EqSmoothError, ValueError):
    pass


class ParseError(EqSmoothError, ValueError):
    pass
