"""Exception hierarchy.

Every error raised on purpose by the package derives from :class:`BBUError`,
and value-type problems additionally derive from :class:`ValueError` so that
callers written against the standard library keep working.
"""


class BBUError(Exception):
    """Base class for all package errors."""


class SchemaError(BBUError, ValueError):
    """A record violates the input schema."""

    def __init__(self, message, field=None, line=None):
        self.field = field
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


class ParseError(BBUError, ValueError):
    """A line of an input file could not be parsed at all."""

    def __init__(self, message, line=None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


class MissingFieldError(SchemaError):
    pass


class EmptyDatasetError(BBUError, ValueError):
    pass


class EmptyGroupError(BBUError, ValueError):
    """One of the two compared groups has no members, so no disparity exists."""


class CostOutOfRangeError(BBUError, ValueError):
    pass


class ZeroFrequencyError(BBUError, ValueError):
    pass


class InvalidParamsError(BBUError, ValueError):
    pass


class InvalidConfidenceError(InvalidParamsError):
    pass


class NonPositiveTError(BBUError, ValueError):
    pass


class NonPositiveDeltaError(BBUError, ValueError):
    """No finite sample size can certify a non-positive disparity."""


class InvalidConfigError(BBUError, ValueError):
    pass


class SampleTooLargeError(BBUError, ValueError):
    pass


class InfeasibleMixError(BBUError, ValueError):
    pass
