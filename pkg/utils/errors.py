"""
Exception hierarchy shared by the engines, the CLI and the HTTP service.
Each error class carries the process exit code the CLI reports for it.
"""


class RandomAccessError(Exception):
    """Base class for every error raised on purpose by this package."""

    exit_code = 1


class InputError(RandomAccessError, ValueError):
    """Invalid arguments: bad field parameters, dimension mismatch, rank deficiency."""

    exit_code = 2


class GuardError(RandomAccessError):
    """A size or enumeration cap was exceeded, or a simulation hit its round cap."""

    exit_code = 3


class ConstructionError(RandomAccessError):
    """An exponent-set search or matrix construction could not be completed."""

    exit_code = 4
