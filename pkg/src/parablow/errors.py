"""Exception hierarchy shared by all parablow modules."""


class ParablowError(Exception):
    """Base class for every error raised by this package."""


class InvalidWeight(ParablowError, ValueError):
    pass


class EmptyExpansion(ParablowError, ValueError):
    pass


class PointNotOnSMinus(ParablowError, ValueError):
    pass


class LatticeMismatch(ParablowError, ValueError):
    pass


class CenterNotOnSPlus(ParablowError, ValueError):
    pass


class NonPositiveSquare(ParablowError, ValueError):
    pass


class NegativeDerivedArea(ParablowError, ValueError):
    pass


class UnknownSection(ParablowError, KeyError):
    pass


class ParityViolation(ParablowError, ValueError):
    pass


class OutOfRange(ParablowError, ValueError):
    pass


class IndeterminateSign(ParablowError, ArithmeticError):
    pass


class NotDestabilizing(ParablowError, ValueError):
    pass


class SearchExhausted(ParablowError, RuntimeError):
    """The destabilizer schedule ran out of budget.

    ``diagnostics`` holds the last evaluated parameters.
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class ConfigError(ParablowError, ValueError):
    pass
