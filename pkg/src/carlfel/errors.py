"""Exception hierarchy shared by the models and the command-line front end."""


class CarlFelError(Exception):
    """Base class for all package errors."""


class ValidationError(CarlFelError, ValueError):
    """Invalid input: bad parameters, inconsistent state, unknown option."""


class NotTwoLevelError(ValidationError):
    """Population has leaked outside the two momentum levels of a reduction."""

    def __init__(self, message, leaked):
        super().__init__(message)
        self.leaked = leaked


class NumericalAbort(CarlFelError, RuntimeError):
    """Integration stopped; ``last_good`` holds ``(tau, y)`` of the last accepted step."""

    def __init__(self, message, last_good=None):
        super().__init__(message)
        self.last_good = last_good


class StepSizeUnderflow(NumericalAbort):
    pass


class InvariantViolation(NumericalAbort):
    pass


class LadderGuardError(NumericalAbort):
    """Edge occupation of the momentum ladder exceeded the truncation guard."""

    def __init__(self, message, side, last_good=None):
        super().__init__(message, last_good)
        self.side = side
