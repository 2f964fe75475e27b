"""Exception hierarchy shared by all modules."""


class ZetathermError(Exception):
    """Base class for errors raised by this package."""


class InvalidShiftError(ZetathermError, ValueError):
    pass


class InadmissibleWordError(ZetathermError, ValueError):
    pass


class PeriodCapExceeded(ZetathermError, ValueError):
    """Raised instead of silently truncating an enumeration."""


class NotPositiveError(ZetathermError, ValueError):
    pass


class ConvergenceError(ZetathermError, ArithmeticError):
    """A numerical procedure failed to reach its tolerance.

    ``residual`` carries the last achieved residual when available.
    """

    def __init__(self, msg, residual=None):
        super().__init__(msg)
        self.residual = residual


class InadmissibleWordWarning(UserWarning):
    """An inadmissible cylinder was queried; its measure is reported as zero."""
