"""Exception hierarchy.

Everything raised on a contract violation derives from ``SASError`` (itself a
``ValueError``) so callers can catch the family in one clause. Input parsing
problems derive from ``InputError`` and are reported separately by the CLI.
"""


class SASError(ValueError):
    """Base class for contract violations."""


class DimensionMismatch(SASError):
    pass


class ZeroFeature(SASError):
    """A feature slice sums to zero and cannot be normalized."""

    def __init__(self, feature, message=None):
        self.feature = feature
        super().__init__(message or f"feature {feature} has zero total dissimilarity")


class ConstantColumn(SASError):
    def __init__(self, column, message=None):
        self.column = column
        super().__init__(message or f"column {column} has zero variance")


class EmptyCluster(SASError):
    pass


class IndexOutOfRange(SASError):
    pass


class TooFewItems(SASError):
    pass


class BadSparsity(SASError):
    pass


class LengthMismatch(SASError):
    pass


class GroupCountMismatch(SASError):
    pass


class DegenerateObjective(SASError):
    """Within-cluster dissimilarity is zero, so its logarithm is undefined."""


class InputError(Exception):
    """Malformed input file."""


class ParseError(InputError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", column {column}"
            where += ": "
        super().__init__(where + message)


class RaggedRows(ParseError):
    pass


class NonNumericCell(ParseError):
    pass
