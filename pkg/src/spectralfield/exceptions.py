"""Exception hierarchy."""


class SpectralFieldError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(SpectralFieldError, ValueError):
    pass


class NotSymmetricError(SpectralFieldError, ValueError):
    pass


class FieldSpecError(SpectralFieldError, ValueError):
    """A field description could not be parsed.

    ``line`` and ``column`` are set when the failure is located in JSON text.
    """

    def __init__(self, message, line=None, column=None):
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)
        self.line = line
        self.column = column


class DegenerateGapError(SpectralFieldError, ArithmeticError):
    """Two distinct eigenvalue groups are too close to divide by their gap."""


class InconsistentDerivativeError(SpectralFieldError):
    """Two formulas for the same derivative disagree.

    This is what happens at eigenvalue crossings, where the eigenvalue is not
    differentiable and the formulas lose their meaning.
    """

    def __init__(self, message, discrepancy, point=None, j=None):
        super().__init__(message)
        self.discrepancy = discrepancy
        self.point = point
        self.j = j


class UnstableTrackingError(SpectralFieldError):
    """Finite differences cannot follow an eigenvalue group by sorted index."""
