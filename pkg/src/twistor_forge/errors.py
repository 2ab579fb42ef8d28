"""Exception types shared across the package."""


class TwistorForgeError(Exception):
    """Base class for all package errors."""


class InsufficientSamplingError(TwistorForgeError):
    """Fewer circle samples than the band requires (need N >= 2K+1)."""


class InvalidGridError(TwistorForgeError):
    """Sample points are not uniformly spaced roots of unity."""


class NonInvertibleError(TwistorForgeError):
    """Matrix inversion refused: condition number above threshold."""


class IllConditionedError(TwistorForgeError):
    """Principal matrix logarithm failed (defective or near-singular input)."""


class MarginError(TwistorForgeError):
    """Grid index lies inside the finite-difference margin."""


class JumpingLineError(TwistorForgeError):
    """Birkhoff factorization did not converge at one or more grid points.

    Carries the offending flat grid indices in ``failed_points``.
    """

    def __init__(self, message, failed_points=None):
        super().__init__(message)
        self.failed_points = list(failed_points) if failed_points is not None else []


class NotGlobalFormError(TwistorForgeError):
    """Per-patch connection components disagree on the overlap."""


class NotLinearInLambdaError(TwistorForgeError):
    """Connection component carries fiber-coordinate degrees other than {0, 1}."""


class WrongPathError(TwistorForgeError):
    """Fast abelian splitting called on data it cannot handle."""


class StaleFactorizationError(TwistorForgeError):
    """The (psi, F) pair no longer satisfies psi1^-1 psi2 = F12 to tolerance."""


class ScenarioError(TwistorForgeError):
    """Scenario file is malformed or violates its invariants."""
