"""Exception types shared by all modules."""


class RedliftError(Exception):
    """Base class. ``residual`` carries the offending measurement when known."""

    def __init__(self, message="", residual=None):
        super().__init__(message)
        self.residual = residual


class NonFinite(RedliftError):
    pass


class NotAContraction(RedliftError):
    pass


class NoFactorization(RedliftError):
    pass


class NotSolvable(RedliftError):
    pass


class NotCoisometric(RedliftError):
    pass


class NotIsometric(RedliftError):
    pass


class ResolventSingular(RedliftError):
    pass


class FractionSingular(RedliftError):
    pass


class FeedbackSingular(RedliftError):
    pass


class NotOpenBall(RedliftError):
    pass


class InconsistentData(RedliftError):
    pass


class ShapeMismatch(RedliftError):
    pass


class FeedthroughNonzero(RedliftError):
    pass


class KernelExtractionError(RedliftError):
    pass


class NotObservable(RedliftError):
    pass


class BadDims(RedliftError):
    pass


class ParseError(RedliftError):
    pass
