"""Exception types shared across the package."""


class NkslabError(Exception):
    """Base class for all package errors."""


class InvalidGridError(NkslabError):
    """Bad interval, node count, or shape parameter."""


class SingularInterpolationError(NkslabError):
    """Interpolation matrix conditioning above the trust cap."""


class NonFiniteRhsError(NkslabError):
    """Semi-discrete right-hand side produced NaN/Inf."""


class BeyondHorizonError(NkslabError):
    """Query time past the last switching instant of a finite schedule."""


class NonmonotoneSequenceError(NkslabError):
    """Switching instants are not strictly increasing."""


class MissingAnchorError(NkslabError):
    """Adaptation rule fired without the anchor samples it references."""


class EmptyLogError(NkslabError):
    """Certificate check on an empty trajectory log."""


class InsufficientLogsError(NkslabError):
    """Uniform-bound check needs at least two distinct-amplitude logs."""


class QuadratureError(NkslabError):
    """Too few quadrature points for an inequality check."""


class DegenerateSpecError(NkslabError):
    """Envelope spec with sigma * T_lower = 0 (geometric sum diverges)."""


class UnstableDtError(NkslabError):
    """Time step fails the explicit-stability guard."""


class ConfigError(NkslabError):
    """Configuration document could not be parsed or validated."""
