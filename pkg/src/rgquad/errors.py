"""Exception types shared across the package."""


class RGQuadError(Exception):
    """Base class for all domain errors raised by rgquad."""


class DimensionCapExceeded(RGQuadError):
    """A dense-matrix operation was requested above the configured qubit cap."""


class IntegrabilityViolation(RGQuadError):
    """A model failed the algebraic integrability constraints."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class DegenerateCoupling(RGQuadError):
    """A coupled pair leaves its relation coefficient undetermined.

    Raised when spin pair (i, j) has a nonzero coupling in the charge of i
    but every admissible denominator (reverse couplings and fields of j)
    vanishes, so no formula pins down the coefficient.
    """


class InternalInconsistency(RGQuadError):
    """Two independent coefficient formulas disagreed beyond tolerance.

    For a genuinely integrable model all derivation routes coincide, so this
    signals either a non-closable model or a bug upstream.
    """


class NonCommutingFamily(RGQuadError):
    """The charges of a model do not commute; joint eigenvalues are undefined."""


class StartupDegenerate(RGQuadError):
    """Some decoupled-limit field magnitude is too small to seed homotopy paths."""


class ConfigError(RGQuadError):
    """Malformed run configuration (CLI exit code 2)."""
