"""Exception hierarchy shared by all overlapk modules."""


class OverlapError(Exception):
    """Base class for every error raised by overlapk."""


class ParameterError(OverlapError, ValueError):
    """A distribution parameter or probability lies outside its domain."""


class DegenerateSampleError(OverlapError, ValueError):
    """A sample has zero spread, so no Silverman bandwidth exists."""


class UsageError(OverlapError, ValueError):
    """Inconsistent arguments, e.g. models and samples of different lengths."""


class IntegrationError(OverlapError, ArithmeticError):
    """Adaptive quadrature ran out of subdivisions before reaching tolerance."""

    def __init__(self, message: str, value: float, error_estimate: float):
        super().__init__(f"{message} (value={value:.12g}, error estimate={error_estimate:.3g})")
        self.value = value
        self.error_estimate = error_estimate


class ConfigError(OverlapError, ValueError):
    """A study configuration document failed validation.

    ``path`` is a JSON-pointer-style location of the offending key.
    """

    def __init__(self, message: str, path: str = ""):
        super().__init__(f"{path or '/'}: {message}")
        self.path = path or "/"
