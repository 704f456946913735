"""Exception types shared across the package."""


class BallHullError(Exception):
    """Base class for all package errors."""


class ResourceGuard(BallHullError):
    """Expected sample size exceeds the configured guard."""


class DegenerateInput(BallHullError):
    """Point configuration is affinely degenerate."""


class OriginOutside(BallHullError):
    """The origin is not inside the hull."""


class AntipodeUndefined(BallHullError):
    """Inverse exponential chart requested at the antipode of the base point."""


class EmptyGerms(BallHullError):
    """A growth process was built from an empty germ set."""


class WindowTooSmall(BallHullError):
    """Simulation window too small for the requested statistic."""


class QuadratureError(BallHullError):
    """Adaptive quadrature failed to reach the requested tolerance."""

    def __init__(self, message: str, achieved: float):
        super().__init__(f"{message} (achieved error estimate {achieved:.3g})")
        self.achieved = achieved


class ConfigError(BallHullError):
    """Invalid run configuration."""


class InversionUndefined(BallHullError):
    """Inversion requested at the origin."""
