"""Exception hierarchy for wulff_lab."""


class WulffLabError(Exception):
    """Base class for all wulff_lab errors."""


class ConfigError(WulffLabError):
    """Invalid configuration value; message names the offending key."""


class ZeroVector(WulffLabError):
    """Gradient of a norm requested at (numerically) zero."""


class NotConvex(WulffLabError):
    """A support function failed the strict convexity test h + h'' > 0."""


class NotSmooth(WulffLabError):
    """Operation requires a smooth (support-curve) body."""


class OriginOutside(WulffLabError):
    """Operation requires the origin in the interior of the body."""


class EmptyCut(WulffLabError):
    """Halfspace misses the body."""


class DegenerateCut(WulffLabError):
    """Halfspace cut produced a zero-area region."""


class QuadratureNotConverged(WulffLabError):
    """Adaptive quadrature failed to reach the requested tolerance."""

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class ConvexityLost(WulffLabError):
    """Flow step produced a curve with min(h + h'') <= 0."""


class CurvatureSignLost(WulffLabError):
    """Flow step produced a curve with non-positive anisotropic curvature."""


class RejectionExhausted(WulffLabError):
    """Random body generator ran out of rejection-sampling attempts."""


class LineSearchFailed(WulffLabError):
    """Backtracking line search could not find an acceptable step."""


class UnsupportedDimension(WulffLabError):
    """Operation not provided in this dimension at desk scale."""
