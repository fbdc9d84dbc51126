"""Exception hierarchy shared by every module."""


class FluxLadderError(Exception):
    """Base class for all errors raised by :mod:`fluxladder`."""


class InvalidArgumentError(FluxLadderError, ValueError):
    pass


class UnsupportedSectorError(InvalidArgumentError):
    pass


class InvalidStateError(FluxLadderError, ValueError):
    pass


class DomainError(FluxLadderError, ValueError):
    """A closed-form expression was requested outside its regime of validity."""


class AccuracyError(FluxLadderError, ArithmeticError):
    """A numerical integration could not meet its accuracy target.

    ``drift`` holds the measured deviation (norm drift or step-doubling error).
    """

    def __init__(self, message, drift=None):
        super().__init__(message)
        self.drift = drift
