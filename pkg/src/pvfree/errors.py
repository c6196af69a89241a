"""Exception hierarchy shared by every module."""


class PVFreeError(Exception):
    """Base class for library errors."""


class DomainError(PVFreeError, ValueError):
    """An argument lies outside the domain of the operation."""


class DegenerateSchemeError(DomainError):
    """Two regulator masses coincide so the coefficients are undefined."""


class InfeasibleCutoffError(PVFreeError, ValueError):
    """No mass assignment reaches the requested cutoff."""


class ConvergenceError(PVFreeError, ArithmeticError):
    """An iterative or adaptive procedure did not reach its tolerance.

    ``estimate`` holds the best value available when the procedure stopped.
    """

    def __init__(self, message, estimate=None, error_estimate=None):
        super().__init__(message)
        self.estimate = estimate
        self.error_estimate = error_estimate


class AccuracyError(ConvergenceError):
    """A special-function evaluation missed its requested tolerance."""


class IntegrandError(PVFreeError, FloatingPointError):
    """The integrand returned NaN; ``abscissa`` is the offending point."""

    def __init__(self, message, abscissa):
        super().__init__(message)
        self.abscissa = abscissa


class OracleAccuracyError(PVFreeError, ArithmeticError):
    """A brute-force Matsubara sum failed to settle within its target."""

    def __init__(self, message, partial_sums=None):
        super().__init__(message)
        self.partial_sums = partial_sums


class FieldFormatError(PVFreeError, ValueError):
    """Base class for field-file decoding problems."""


class UnsupportedVersionError(FieldFormatError):
    pass


class MalformedPayloadError(FieldFormatError):
    pass


class InvalidDataError(FieldFormatError):
    pass


class GaugeError(PVFreeError, ValueError):
    """The spectral field has not been projected onto the Coulomb gauge."""
