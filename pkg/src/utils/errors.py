"""
Errors Module for Simpson Scan
Exception hierarchy shared by the loader, the statistics code and the CLI
"""


class DisaggregationError(Exception):
    """Base class for every error raised by this package"""

    exit_code = 2


class UsageError(DisaggregationError):
    """Bad command-line usage"""

    exit_code = 1


class ConfigError(UsageError):
    """Invalid configuration value or unreadable config file"""


class DataError(DisaggregationError):
    """Problem with the input data or with a computation on it"""

    exit_code = 2


class FileError(DataError):
    """Input file missing or unreadable"""


class SchemaError(DataError):
    """Header does not match the schema (missing/duplicate columns)"""


class ParseError(DataError):
    """
    A cell could not be parsed

    Args:
        message (str): Description of the problem
        row (int): 1-based data row (header excluded), if known
        column (str): Offending column, if known
    """

    def __init__(self, message, row=None, column=None):
        super().__init__(message)
        self.row = row
        self.column = column


class UnknownColumn(DataError):
    """Column name is not a covariate of the dataset"""


class SameColumn(DataError):
    """A pair view was requested with the same column twice"""


class EmptyInput(DataError):
    """An operation received an empty vector"""


class LengthMismatch(DataError):
    """Vectors that must align have different lengths"""


class ZeroVariance(DataError):
    """The outcome has no variation to explain"""


class DomainError(DataError):
    """Argument outside the mathematical domain of a function"""


class DegenerateFit(DataError):
    """A test was requested on a fit that has no usable slope"""


class ConstantOutcome(DataError):
    """The outcome is constant on the rows of a pair"""


class TooFewCovariates(DataError):
    """A scan needs at least two covariates"""


class InvalidSpec(DataError):
    """Synthetic generator spec is malformed"""
