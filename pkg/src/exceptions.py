"""Error hierarchy shared by the computation modules and the CLI."""


class SudlerLabError(Exception):
    """Base class; `exit_code` is what the CLI exits with."""

    exit_code = 4


class AlphaParseError(SudlerLabError, ValueError):
    exit_code = 2

    def __init__(self, text, position, reason):
        self.text = text
        self.position = position
        self.reason = reason
        super().__init__(
            "cannot parse {!r} at position {}: {}".format(
                text, position, reason))


class NonCanonicalError(SudlerLabError, ValueError):
    pass


class PrecisionError(SudlerLabError, ArithmeticError):
    pass


class InconsistencyError(SudlerLabError, ArithmeticError):
    pass


class OstrowskiRangeError(SudlerLabError, ValueError):
    pass


class InvalidDigitsError(SudlerLabError, ValueError):
    pass


class SingularFactorError(SudlerLabError, ArithmeticError):

    def __init__(self, n, target):
        self.n = n
        self.target = target
        super().__init__(
            "factor n={} of the product for {} vanishes".format(n, target))


class FormError(SudlerLabError, ValueError):
    pass


class DomainError(SudlerLabError, ValueError):
    pass


class BudgetError(SudlerLabError, ValueError):
    exit_code = 3


class ToleranceUnreachableError(SudlerLabError, ValueError):
    pass
