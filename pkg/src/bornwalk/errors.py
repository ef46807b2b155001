"""Exception hierarchy shared by all bornwalk modules."""


class BornwalkError(Exception):
    """Base class for every error raised by this package."""


class ConfigInvalid(BornwalkError):
    """A configuration value or file violates its contract.

    Carries an optional dotted field path so callers can point at the
    offending entry.
    """

    def __init__(self, message, field=None):
        self.field = field
        if field:
            message = f"{field}: {message}"
        super().__init__(message)


class NonFiniteResult(BornwalkError):
    """A numerical routine produced NaN or infinity."""


class DegenerateState(BornwalkError):
    """A state with (numerically) zero norm where a positive norm is required."""


class NotHermitian(BornwalkError):
    """An operator block fails the Hermiticity tolerance."""

    def __init__(self, index, deviation):
        self.index = index
        self.deviation = deviation
        super().__init__(f"block {index} is not Hermitian (max deviation {deviation:.3e})")


class DimensionMismatch(BornwalkError):
    """Operator, state, or subset dimensions do not agree."""


class EigenFailure(BornwalkError):
    """Dense eigendecomposition failed to converge."""


class NoActivePair(BornwalkError):
    """A walk step was requested from a point with fewer than two positive coordinates."""


class TooManyUnabsorbed(BornwalkError):
    """More than the tolerated fraction of walks hit the step budget unabsorbed."""

    def __init__(self, unabsorbed, total, max_steps):
        self.unabsorbed = unabsorbed
        self.total = total
        super().__init__(
            f"{unabsorbed}/{total} walks not absorbed within {max_steps} steps; "
            "increase max_steps or use a faster-absorbing kernel"
        )


class SolverFailure(BornwalkError):
    """A linear solve for absorption probabilities failed."""


class SizeExceeded(BornwalkError):
    """A lattice chain has more transient states than the configured cap."""


class DegenerateExpected(BornwalkError):
    """Chi-square test requested against a distribution with all mass in one category."""
