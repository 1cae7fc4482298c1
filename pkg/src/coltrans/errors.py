"""Exception types shared across the package."""


class ParameterError(ValueError):
    """Physical or numerical parameter outside its admissible range."""


class ConfigError(ValueError):
    """Run configuration file is missing, malformed, or inconsistent."""


class QuadratureError(RuntimeError):
    """Adaptive quadrature failed to reach the requested tolerance."""


class BracketingError(RuntimeError):
    """Root bracket for a transcendental eigenvalue could not be resolved."""


class FluxTransformError(ValueError):
    """Half-line flux transform is undefined for the given parameters."""


class NumericOverflowError(FloatingPointError):
    """An intermediate exponential left the double-precision range."""
