"""Exception hierarchy.

Three families, each mapped to a CLI exit code: :class:`ValidationError` (1),
:class:`DataError` (2) and :class:`SolverError` (3).
"""


class MarketQuboError(Exception):
    exit_code = 1


class ValidationError(MarketQuboError, ValueError):
    exit_code = 1


class DimensionError(ValidationError):
    pass


class ParameterError(ValidationError):
    pass


class DataError(MarketQuboError):
    exit_code = 2


class MalformedInputError(DataError):
    pass


class InsufficientDataError(DataError):
    pass


class NoDataForYearError(DataError):
    pass


class DegenerateSeriesError(DataError):
    pass


class AlignmentError(DataError):
    pass


class SolverError(MarketQuboError):
    exit_code = 3


class ConfigError(SolverError, ValueError):
    pass


class ProblemTooLargeError(SolverError):
    pass


class UnsupportedProblemError(SolverError):
    pass
