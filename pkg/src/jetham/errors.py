"""Exception hierarchy shared by every jetham module."""


class JethamError(Exception):
    """Base class for all errors raised by jetham."""


class ParseError(JethamError):
    """Positioned error raised while reading expressions or model files.

    ``line`` and ``column`` are 1-based; ``hint`` is a one-line fix suggestion.
    """

    def __init__(self, message, line=1, column=1, hint=""):
        self.message = message
        self.line = line
        self.column = column
        self.hint = hint
        text = f"{line}:{column}: {message}"
        if hint:
            text += f" (hint: {hint})"
        super().__init__(text)


class UnknownNameError(ParseError):
    pass


class ArityError(ParseError):
    pass


class DerivationError(JethamError):
    """A library operation was asked for something its preconditions forbid."""


class NonPolynomialError(DerivationError):
    pass


class CyclicBindingError(DerivationError):
    pass


class ExpressionTooLarge(DerivationError):
    pass


class FormDegreeError(DerivationError):
    pass


class JetOrderError(DerivationError):
    """A jet coordinate beyond the chart's declared order was required."""


class ConnectionMismatchError(DerivationError):
    pass


class SectionError(DerivationError):
    pass


class DegenerateLagrangianError(DerivationError):
    pass
