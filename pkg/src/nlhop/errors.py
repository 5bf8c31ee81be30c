"""Exception types raised by the solver library."""


class NlhopError(Exception):
    """Base class for all library errors."""


class InvalidRegime(NlhopError, ValueError):
    """Model parameters violate the constraints of their regime."""


class InvalidK(NlhopError, ValueError):
    """Ring period outside the supported range (k >= 3)."""


class ZeroField(NlhopError, ValueError):
    """Operation requires a nonzero field."""


class DegenerateNonlinearity(NlhopError, ValueError):
    """Both nonlinear sums vanish, so the fibering map has no positive root."""


class OddPeriod(NlhopError, ValueError):
    """Staggering requested on a ring with odd period."""


class WindowTooLarge(NlhopError, ValueError):
    """Comparison window does not fit inside the ring."""


class SingularJacobian(NlhopError, ArithmeticError):
    """Newton system is singular or numerically degenerate."""


class NonFinite(NlhopError, FloatingPointError):
    """A time integration produced inf or nan entries."""


class NoConvergence(NlhopError, RuntimeError):
    """Iteration budget exhausted before reaching the tolerance.

    ``best`` carries the best iterate found (solver specific type) or None.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class ConfigError(NlhopError, ValueError):
    """Invalid run configuration; ``field`` names the offending key."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field
