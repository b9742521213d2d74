"""Exception types shared across the library.

Every failure mode raised by semiclab derives from :class:`SemiclabError`
so callers can catch library errors without swallowing programming bugs.
"""


class SemiclabError(Exception):
    """Base class for all semiclab failures."""


# --- numerics ---------------------------------------------------------------

class DegeneratePolynomial(SemiclabError):
    """Leading polynomial coefficient is zero."""


class StepLimitExceeded(SemiclabError):
    """ODE integrator used up its step budget before reaching t1."""


class RhsNonFinite(SemiclabError):
    """ODE right-hand side produced NaN or Inf along the trajectory."""


class IntegrationFailed(SemiclabError):
    """ODE integrator aborted for a reason other than the step budget."""


class NonConvergent(SemiclabError):
    """Quadrature refinement stalled above the requested tolerance."""


class NoConvergence(SemiclabError):
    """Root iteration did not reach tolerance; carries the best iterate."""

    def __init__(self, message, best=None, residual=None, iterations=None):
        super().__init__(message)
        self.best = best
        self.residual = residual
        self.iterations = iterations


# --- complex trajectories ----------------------------------------------------

class RangeError(SemiclabError):
    """Closed-form evaluation would overflow the floating range."""


class EnergyDriftExceeded(SemiclabError):
    """Energy conservation along a trajectory violated the tolerance."""


class NeverCrossed(SemiclabError):
    """Trajectory ended before reaching the right turning point.

    ``t_lower_bound`` is the integration horizon; the crossing time, if it
    exists, is larger.
    """

    def __init__(self, message, t_lower_bound=None):
        super().__init__(message)
        self.t_lower_bound = t_lower_bound


# --- WKB ----------------------------------------------------------------------

class NoAllowedRegion(SemiclabError):
    """No classically allowed region at the requested energy."""


class MoreThanTwoTurningPoints(SemiclabError):
    """Energy slice has more than one allowed region; isolate a well first."""


class RootNotBracketed(SemiclabError):
    """Quantization condition has no solution in the searched window."""


# --- operator lab --------------------------------------------------------------

class GridTooCoarse(SemiclabError):
    """Requested stencil does not fit on the grid."""


class DivisionNearZero(SemiclabError):
    """Test function too small everywhere to form a pointwise ratio."""


class ConvergenceFailure(SemiclabError):
    """Eigensolver failed to converge."""


# --- coupled channels ----------------------------------------------------------

class TrappedOrbit(SemiclabError):
    """Classical trajectory failed to reach and escape closest approach."""


class UnitarityLoss(SemiclabError):
    """Time-dependent amplitude evolution lost probability above tolerance."""


class ChannelClosedInRange(SemiclabError):
    """A channel momentum turns imaginary inside the integration range."""


# --- Gutzwiller -------------------------------------------------------------------

class TruncationNotConverged(SemiclabError):
    """Periodic-orbit sum truncation error exceeds tolerance away from poles."""


# --- model files -------------------------------------------------------------------

class ParseError(SemiclabError):
    """Model configuration text failed to parse."""

    def __init__(self, message, line=None, column=None):
        super().__init__(message)
        self.line = line
        self.column = column


class ValidationError(SemiclabError):
    """Parsed model violates a named invariant."""

    def __init__(self, message, invariant=None):
        super().__init__(message)
        self.invariant = invariant
