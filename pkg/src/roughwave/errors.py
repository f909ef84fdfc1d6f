"""Exception types shared across the solver and verification layers."""


class RoughwaveError(Exception):
    """Base class for all package-specific failures."""


class CubeRangeError(RoughwaveError, IndexError):
    """A cube index falls outside the lattice's cube range."""


class SupportError(RoughwaveError, ValueError):
    """A field violates a required spectral support condition."""


class PreconditionError(RoughwaveError, ValueError):
    """An argument falls outside the range where an estimate is claimed."""


class AliasingError(RoughwaveError, ValueError):
    """Requested padding is too small to dealias a pointwise power."""


class NumericRangeError(RoughwaveError, ArithmeticError):
    """A pointwise power overflowed the floating-point range."""


class ZeroFieldError(RoughwaveError, ZeroDivisionError):
    """A norm ratio is undefined because the denominator field is zero."""


class GridOverflowError(RoughwaveError, ValueError):
    """A dilated spectral support does not fit on the target lattice."""


class OracleError(RoughwaveError, RuntimeError):
    """The independent ODE oracle failed to reach its error tolerance."""


class SmallnessError(RoughwaveError, ValueError):
    """Linear-part norm exceeds the admissible fixed-point budget.

    Carries the measured weighted norm and the budget it had to stay under.
    """

    def __init__(self, measured: float, budget: float):
        self.measured = measured
        self.budget = budget
        super().__init__(
            f"linear part weighted norm {measured:.6e} exceeds nu/2 = {budget:.6e}"
        )


class DivergenceError(RoughwaveError, RuntimeError):
    """Successive fixed-point corrections grew for several iterations."""


class SpectralOverflowError(RoughwaveError, RuntimeError):
    """Spectral mass in the outer frequency shell breached the monitor tolerance."""


class ConfigError(RoughwaveError, ValueError):
    """A run configuration failed to parse or validate."""
