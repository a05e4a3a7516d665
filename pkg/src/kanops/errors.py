"""Exception taxonomy shared across the package.

Every error raised by the public API derives from :class:`KanopsError`, so
callers can catch the whole family with one clause while still being able to
distinguish configuration problems (bad tokens), argument problems (bad
values or mismatched shapes), and numeric failures (non-finite samples,
non-convergent iterations, vanishing denominators).
"""

from __future__ import annotations

__all__ = [
    "KanopsError",
    "ConfigurationError",
    "ArgumentError",
    "ConjugateInfiniteError",
    "NumericError",
    "DegenerateKernelError",
    "UnrecoverableMaskError",
    "PgmError",
]


class KanopsError(Exception):
    """Base class for all errors raised by this package."""


class ConfigurationError(KanopsError, ValueError):
    """A string token or configuration value could not be interpreted.

    Raised while parsing kernel tokens (``"bspline:7"``), Orlicz-function
    tokens, noise tokens, and similar selector strings.
    """


class ArgumentError(KanopsError, ValueError):
    """An argument violates a documented precondition.

    Covers shape/dimension mismatches, out-of-range parameters, and values of
    the wrong structure.
    """


class ConjugateInfiniteError(ArgumentError):
    """A Hoelder check was requested with some exponent equal to 1.

    The conjugate exponent would be infinite, which is outside the scope of
    the implemented mixed-norm machinery.
    """


class NumericError(KanopsError, ArithmeticError):
    """A computation produced or encountered an invalid numeric state."""


class DegenerateKernelError(NumericError):
    """The kernel-weight denominator fell below the representable floor.

    The normalizing sum of shifted kernel values must stay strictly positive;
    values below ``1e-300`` cannot be divided through reliably.
    """


class UnrecoverableMaskError(KanopsError, ValueError):
    """An inpainting mask invalidates every pixel, leaving no data."""


class PgmError(KanopsError, ValueError):
    """A PGM stream could not be parsed.

    Parameters
    ----------
    message : str
        Description of the problem.
    offset : int
        Byte offset into the stream at which the problem was detected; it is
        appended to the rendered message.
    """

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset
