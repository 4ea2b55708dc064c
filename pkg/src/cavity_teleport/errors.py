"""Exception types raised across the package."""


class CavityTeleportError(Exception):
    """Base class for all package errors."""


class InvalidSubsystem(CavityTeleportError, ValueError):
    pass


class OutOfRange(CavityTeleportError, IndexError):
    pass


class SpaceMismatch(CavityTeleportError, ValueError):
    pass


class NotNormalized(CavityTeleportError, ValueError):
    pass


class ZeroNorm(CavityTeleportError, ValueError):
    pass


class TruncationLeakage(CavityTeleportError, RuntimeError):
    """Evolution would push population past the highest retained Fock level."""

    def __init__(self, message: str, population: float):
        super().__init__(message)
        self.population = population


class NotHermitian(CavityTeleportError, ValueError):
    pass


class NoConvergence(CavityTeleportError, RuntimeError):
    pass


class ZeroProbabilityBranch(CavityTeleportError, RuntimeError):
    """A requested measurement outcome has (numerically) zero weight.

    ``probability`` is the weight of the requested branch at the failing
    measurement; protocol runners rewrite it to the joint path probability.
    """

    def __init__(self, message: str, probability: float):
        super().__init__(message)
        self.probability = probability


class DegenerateAngle(CavityTeleportError, ValueError):
    pass


class InvalidRange(CavityTeleportError, ValueError):
    pass


class NonPositiveCoupling(CavityTeleportError, ValueError):
    pass
