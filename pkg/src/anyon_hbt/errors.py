"""Exception types raised by the numerical layers."""


class DomainError(ValueError):
    """An argument lies outside the supported domain of an operation."""


class ConvergenceError(ArithmeticError):
    """An expansion or iteration failed to reach its requested tolerance."""


class TruncationError(ConvergenceError):
    """A partial-wave sum hit its hard cap before the tail bound was met."""


class QuadratureError(ConvergenceError):
    """Adaptive radial quadrature ran out of subdivisions."""
