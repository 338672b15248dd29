"""Exception types shared across the package."""


class WvaError(Exception):
    """Base class for all package-specific errors."""


class PostSelectionSingular(WvaError):
    """Pre- and post-selected states are (numerically) orthogonal.

    The post-selected output carries no photons, so conditional moments,
    shifts and noise budgets are undefined.
    """


class WeakRegimeViolation(WvaError):
    """The displacement phase is too large for the leading-order noise budget.

    Raised when the internal representations of the frequency-shift variance
    disagree beyond tolerance, signalling that terms dropped at leading order
    in the displacement phase are no longer negligible.
    """


class QuadratureNonConvergence(WvaError):
    """Successive quadrature refinements failed to agree to tolerance."""


class EmptyPostSelection(WvaError):
    """A Monte-Carlo ensemble retained too few non-empty pulses to estimate."""


class WeakRegimeWarning(UserWarning):
    """Soft warning: displacement phase above the documented validity guard."""
