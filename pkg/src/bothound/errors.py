"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: usage errors -> 1, data/format
errors -> 2, invariant violations -> 3.
"""


class BothoundError(Exception):
    """Base class for all package errors."""


class DataFormatError(BothoundError):
    """Input data is malformed, inconsistent, or of the wrong shape."""


class CorruptArchiveError(DataFormatError):
    """More than half of an archive's lines failed to parse (wrong file?)."""


class InvariantError(BothoundError):
    """An internal invariant was violated; indicates a bug, not bad input."""
