"""Exception hierarchy for the IAC engine."""


class IacError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(IacError, ValueError):
    """A system configuration is malformed."""


class DimensionMismatchError(ConfigError):
    """Per-MAC DoF lists do not match the declared group sizes."""


class DofRangeError(ConfigError):
    """A per-user DoF lies outside ``[1, M]``."""


class UnseparableTailError(IacError):
    """The last MAC alone carries more streams than there are antennas."""


class IacIndexError(IacError, IndexError):
    """A receiver index lies outside the range an operation is defined on."""


class SubsetUniverseTooLargeError(IacError):
    """Exhaustive subset enumeration was requested beyond the cap."""


class ConstructionImpossibleError(IacError):
    """No maximum-DoF configuration exists for the requested ``(K, M)``."""


class InfeasibleConfigError(IacError):
    """The configuration fails the closed-form existence conditions."""


class PlanError(IacError):
    """An alignment plan violates a structural invariant."""


class PlanNotFoundError(PlanError):
    """Backtracking exhausted every basis/pairing choice."""


class GraphError(IacError):
    """An IAC graph operation was given an invalid graph or vertex."""


class UnknownVertexError(GraphError, KeyError):
    pass


class MoreThanOneLoopError(GraphError):
    pass


class SolverError(IacError):
    """Base class for numerical failures while building transceivers."""


class SingularChannelError(SolverError):
    pass


class EigenFailureError(SolverError):
    pass


class DependentColumnsError(SolverError):
    pass


class InsufficientSpaceError(SolverError):
    pass


class ComplementTooSmallError(SolverError):
    pass


class EmptyResultError(IacError):
    """A Monte Carlo cell accepted no runs."""
