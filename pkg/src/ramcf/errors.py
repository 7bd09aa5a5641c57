"""Exception hierarchy for the ramcf package."""


class RamcfError(Exception):
    """Base class for all ramcf errors."""


class PrecisionError(RamcfError):
    """Requested working precision is below the supported minimum."""


class NonPositiveCoefficient(RamcfError):
    """A continued-fraction coefficient b <= 0 was supplied; the map
    z -> -b/(z+1) preserves the upper half-plane only for b > 0."""


class NonPositiveDeterminant(RamcfError):
    """Matrix with det <= 0 cannot represent a half-plane Moebius map."""


class NotHyperbolic(RamcfError):
    """Operation requires a hyperbolic transformation."""


class NotElliptic(RamcfError):
    """Operation requires an elliptic transformation (a > 1/4)."""


class PoleDerivative(RamcfError):
    """Derivative requested at the pole of the transformation."""


class OutOfRange(RamcfError):
    """Argument outside the documented domain."""


class NotPeriodic(RamcfError):
    """Finite orbit failed to close up within tolerance."""


class RepellerInOrbit(RamcfError):
    """Chosen repeller target lies on the finite orbit of 0."""


class ExceptionalRepeller(RamcfError):
    """Repeller target where the derivative fields degenerate (no
    admissible linear family exists)."""


class NoAdmissibleRepeller(RamcfError):
    """No boundary point satisfies the requested avoidance margin."""


class StageNotHyperbolic(RamcfError):
    """A construction stage map failed to be hyperbolic."""

    def __init__(self, stage, message=None):
        self.stage = stage
        super().__init__(message or f"stage {stage} is not hyperbolic")


class DegenerateSlope(RamcfError):
    """Multiplier slope at t = 0 is numerically zero; the linear family
    does not control the multiplier."""


class NotEnoughConvergents(RamcfError):
    """Rotation-number expansion exhausted before enough admissible
    convergents (q >= 3) were produced; input is likely rational."""


class PowerCapExceeded(RamcfError):
    """Block power search exceeded the configured cap."""

    def __init__(self, needed_estimate, cap, message=None):
        self.needed_estimate = needed_estimate
        self.cap = cap
        super().__init__(
            message
            or f"power cap {cap} exceeded (estimated N ~ {needed_estimate})"
        )


class CauchyViolation(RamcfError):
    """A Cauchy-certificate inequality failed."""

    def __init__(self, k, m=None, message=None):
        self.k = k
        self.m = m
        where = f"k={k}" + (f", m={m}" if m is not None else "")
        super().__init__(message or f"Cauchy estimate violated at {where}")


class ScenarioError(RamcfError):
    """Scenario file is malformed or inconsistent."""
