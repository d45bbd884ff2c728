"""Exception hierarchy shared by every module."""


class RedallocError(Exception):
    """Base class for all package errors."""


class ValidationError(RedallocError, ValueError):
    """Malformed input: bad scenario fields, length mismatch, unknown token."""


class ParameterError(ValidationError):
    """A model parameter lies outside its family's admissible range."""


class DomainError(RedallocError, ArithmeticError):
    """An evaluation point lies outside the region where a formula is defined."""


class PoleError(DomainError):
    """Evaluation at a point where a ratio has a vanishing denominator."""


class UnsupportedSamplerError(ValidationError):
    """No exact sampler exists for the requested copula parameters."""


class QuadratureError(DomainError):
    """Adaptive quadrature failed to reach the requested tolerance."""
