"""Exception hierarchy shared by all modules."""


class VortexLabError(Exception):
    """Base class for every error raised by this package."""


class SingularPoint(VortexLabError, ValueError):
    """Green's function requested at (or numerically at) the origin."""


class SingularArgument(SingularPoint):
    """A reduced symmetric system hit a zero argument of F."""


class CollidedConfiguration(VortexLabError, ValueError):
    """Two vortices coincide on the torus."""


class WrongArity(VortexLabError, ValueError):
    """Operation defined only for a specific number of vortices."""


class StepExploded(VortexLabError, RuntimeError):
    """Reduced-law velocity exceeded the sanity bound."""


class ResolutionError(VortexLabError, ValueError):
    """Grid too coarse for the requested core size or disc radius."""


class GeometryError(VortexLabError, ValueError):
    """Support condition of a test function is violated."""


class NoConvergence(VortexLabError, RuntimeError):
    """Newton iteration did not reach the residual target."""


class BlowupDetected(VortexLabError, RuntimeError):
    """NLSE amplitude left the physically sensible range."""


class TrackingLost(VortexLabError, RuntimeError):
    """Vortex assignment failed at time ``t``."""

    def __init__(self, t, message=""):
        self.t = float(t)
        super().__init__(message or f"tracking lost at t={self.t:g}")


class ConfigError(VortexLabError, ValueError):
    """Invalid run configuration."""
