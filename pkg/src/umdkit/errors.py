"""Exception hierarchy shared across the package."""


class UMDError(Exception):
    """Base class for all errors raised by umdkit."""


class DomainError(UMDError, ValueError):
    """A point lies outside the domain where an oracle is defined."""


class UnboundedError(UMDError, ArithmeticError):
    """A linear minimization over an unbounded set has no finite value."""


class UnsupportedError(UMDError, TypeError):
    """The requested operation is not available for this regularizer."""


class CertificationError(UMDError):
    """A step violated the UMD conditions beyond tolerance."""

    def __init__(self, message, t=None, residual_I=None, residual_II=None):
        super().__init__(message)
        self.t = t
        self.residual_I = residual_I
        self.residual_II = residual_II


class ArgumentError(UMDError, ValueError):
    """Invalid scalar argument (non-positive constant, bad horizon, ...)."""


class BoundViolation(UMDError):
    """An adversary exceeded its declared payoff bound."""


class DimensionError(UMDError, ValueError):
    """Array shapes are inconsistent."""


class LabelError(UMDError, ValueError):
    """Classification targets are not in {-1, +1}."""


class ParseError(UMDError, ValueError):
    """Malformed input file; message names the offending location."""


class RaggedRowError(ParseError, DimensionError):
    """A CSV row has a different field count than the first row."""


class ConfigError(UMDError, ValueError):
    """An experiment configuration is missing keys or names unknown kinds."""
