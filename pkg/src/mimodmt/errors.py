"""Exception hierarchy shared by all modules.

Each class maps to a CLI exit code: ParameterError -> 2, RegimeError -> 3,
PrecisionError -> 4.
"""


class MimoDmtError(Exception):
    """Base class for all package errors."""


class ParameterError(MimoDmtError, ValueError):
    """An argument is outside its allowed domain."""


class RegimeError(MimoDmtError):
    """The requested evaluation is outside the validity regime of a formula."""


class PrecisionError(MimoDmtError):
    """A numerical procedure failed to reach the requested tolerance."""


class DataError(MimoDmtError):
    """Input data (matrices, samples) is malformed or non-finite."""
