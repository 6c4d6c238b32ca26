"""Exception types shared across the toolkit."""


class LclabError(Exception):
    """Base class for all toolkit errors."""


class UnsupportedVariant(LclabError):
    """Requested operation has no exact representation for this variant."""


class DimensionTooLarge(LclabError):
    """Exact formula restricted to low dimension; use the Monte Carlo path."""


class GridMismatch(LclabError):
    """Grid functions live on incompatible grids."""


class ImproperInput(LclabError):
    """Function is identically +inf (or otherwise improper)."""


class OutsideSupport(LclabError):
    """Point lies outside the support of a truncated/indicator density."""


class SingularEstimate(LclabError):
    """Sample covariance is not positive definite (under-sampling)."""


class RejectionStall(LclabError):
    """Rejection sampler acceptance rate fell below the stall threshold."""


class NonFiniteObservable(LclabError):
    """Observable returned NaN/inf at a sample point."""

    def __init__(self, point, value):
        super().__init__(f"observable value {value!r} at point {point!r}")
        self.point = point
        self.value = value


class MassTooSmall(LclabError):
    """Mass estimate too small relative to its standard error for stable powers."""


class ProxNoConverge(LclabError):
    """Proximal (Moreau) minimization failed to reach tolerance."""


class LineSearchNoConverge(LclabError):
    """1D convex minimization failed to reach tolerance."""


class NoConvergence(LclabError):
    """Extrapolated limit did not settle."""


class QuadratureNoConverge(LclabError):
    """Numerical integration failed to reach the requested accuracy."""
