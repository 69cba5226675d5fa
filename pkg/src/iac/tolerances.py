"""Numerical thresholds shared by the solver and the verifier."""

from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    """All rank and residual thresholds in one place.

    Parameters
    ----------
    rank_rel : float
        Singular values below ``rank_rel * largest`` count as zero.
    singular_channel_rel : float
        A channel matrix whose condition number exceeds
        ``1 / singular_channel_rel`` is rejected as singular.
    dependent_columns : float
        Smallest singular value a user's unit-column precoder may have.
    zero_forcing : float
        Largest normalized leakage a receiver may see and still decode.
    orthonormal : float
        Largest Gram residual ``|U^H U - I|`` accepted for receivers.
    """

    rank_rel: float = 1e-8
    singular_channel_rel: float = 1e-12
    dependent_columns: float = 1e-8
    zero_forcing: float = 1e-8
    orthonormal: float = 1e-10


DEFAULT_TOLERANCES = Tolerances()
