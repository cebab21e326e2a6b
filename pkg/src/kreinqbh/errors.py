"""Exception types shared across the package."""


class KreinError(Exception):
    """Base class for errors raised by this package."""


class ConfigError(KreinError, ValueError):
    """Invalid model parameters, coupling data or run configuration."""


class UnsupportedOperation(KreinError):
    """Operation not defined for the given band count or dimension."""


class NumericalFailure(KreinError, ArithmeticError):
    """An eigensolver, quadrature or fit could not produce a trustworthy value."""


class SingularPointError(NumericalFailure):
    """Requested quantity is undefined at an exceptional point or Krein collision.

    Attributes
    ----------
    k : momentum (or other locator) of the offending point, if known.
    classification : the point classification that triggered the error.
    """

    def __init__(self, message: str, k=None, classification: str | None = None):
        super().__init__(message)
        self.k = k
        self.classification = classification


class InstabilityError(KreinError):
    """Dynamical stability was required but the system is unstable."""
