"""Exception types.  Every error carries a machine-readable ``to_dict`` payload."""
from __future__ import annotations


class YbebError(Exception):
    code = "YbebError"

    def __init__(self, message="", **details):
        super().__init__(message)
        self.message = message
        self.details = details

    def to_dict(self):
        out = {"error": self.code, "message": self.message}
        for k, v in self.details.items():
            if isinstance(v, (str, int, float, bool, type(None))):
                out[k] = v
            elif isinstance(v, complex):
                out[k] = [v.real, v.imag]
        return out


class DimensionMismatch(YbebError, ValueError):
    code = "DimensionMismatch"


class OutOfRange(YbebError, ValueError):
    code = "OutOfRange"


class InvalidSite(YbebError, ValueError):
    code = "InvalidSite"


class UnsupportedDim(YbebError, ValueError):
    code = "UnsupportedDim"


class BasisNotOrthogonal(YbebError, ValueError):
    code = "BasisNotOrthogonal"


class BasisMismatch(YbebError, ValueError):
    code = "BasisMismatch"


class NotADivergence(YbebError):
    code = "NotADivergence"

    def __init__(self, message="", residual=None, c_power=None, result=None):
        super().__init__(message, residual=residual, c_power=c_power)
        self.residual = residual
        self.c_power = c_power
        self.result = result


class NonTerminating(YbebError):
    code = "NonTerminating"


class NotIntegrable(YbebError):
    """Reshetikhin condition fails."""

    code = "NotIntegrable"

    def __init__(self, message="", residual=None, order=3, state=None):
        super().__init__(message, residual=residual, order=order)
        self.residual = residual
        self.order = order
        self.state = state


class HigherConditionViolated(YbebError):
    code = "HigherConditionViolated"

    def __init__(self, message="", m=None, residual=None, state=None):
        super().__init__(message, m=m, residual=residual, order=None if m is None else 2 * m + 1)
        self.m = m
        self.residual = residual
        self.state = state


class NoAdmissibleShift(YbebError):
    code = "NoAdmissibleShift"

    def __init__(self, message="", m=None, state=None):
        super().__init__(message, m=m)
        self.m = m
        self.state = state


class OddUnitarityViolation(YbebError):
    code = "OddUnitarityViolation"

    def __init__(self, message="", order=None, residual=None):
        super().__init__(message, order=order, residual=residual)
        self.order = order
        self.residual = residual


class TooManyBranches(YbebError):
    code = "TooManyBranches"


class TruncationTooShallow(YbebError, ValueError):
    code = "TruncationTooShallow"


class InfeasibleSize(YbebError, ValueError):
    code = "InfeasibleSize"


class UnknownModel(YbebError, KeyError):
    code = "UnknownModel"

    def __str__(self):
        return self.message


class BadParams(YbebError, ValueError):
    code = "BadParams"


class BadConfig(YbebError, ValueError):
    code = "BadConfig"
