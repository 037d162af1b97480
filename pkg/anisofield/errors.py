"""
    anisofield.errors
    -----------------

    Error hierarchy shared by every module. Each error exposes a stable
    ``code`` (its class name) and the process ``exit_status`` used by the
    command line front end.

    :copyright: (c) 2026, anisofield authors.
    :license: BSD, see LICENSE for details.
"""


class AnisofieldError(ValueError):
    """Base class of all anisofield errors."""

    exit_status = 3

    def __init__(self, message, **details):
        super().__init__(message)
        self.message = message
        self.details = details

    @property
    def code(self):
        return type(self).__name__

    def as_dict(self):
        return {"code": self.code, "message": self.message, "details": self.details}


class ConfigurationError(AnisofieldError):
    """Inputs cannot describe a valid experiment."""

    exit_status = 2


class NumericalError(AnisofieldError):
    """A computation failed or its result cannot be trusted."""

    exit_status = 3


class ConfigError(ConfigurationError):
    pass


class OutOfRegion(ConfigurationError):
    pass


class BoundaryParameter(ConfigurationError):
    pass


class DegenerateMatrix(ConfigurationError):
    pass


class InvalidAngularSpec(ConfigurationError):
    pass


class FamilyNotDefinedInRegion(ConfigurationError):
    pass


class RectangleExceedsGrid(ConfigurationError):
    pass


class SingularOrigin(NumericalError):
    pass


class InconsistentHomogeneity(NumericalError):
    pass


class TruncationDominates(NumericalError):
    pass


class QuadratureNotConverged(NumericalError):
    pass


class AllocationTooLarge(NumericalError):
    pass


class NotPSD(NumericalError):
    pass


class UnsupportedFamily(NumericalError):
    pass


class NoSeparation(NumericalError):
    pass


class ZeroValue(NumericalError):
    pass
