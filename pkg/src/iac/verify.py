"""Numerical certification of a transceiver set."""

from dataclasses import dataclass

import numpy as np

from .feasibility import InequalityCheck
from .model import compute_k_iac, total_dof
from .tolerances import DEFAULT_TOLERANCES

__all__ = [
    "VerificationReport",
    "zf_residual",
    "signal_rank_check",
    "dimension_budget",
    "independence_margins",
    "achieved_dof",
    "verify",
]


@dataclass(frozen=True)
class VerificationReport:
    max_zf_residual: float
    signal_ranks: tuple
    required_ranks: tuple
    min_singular_values: tuple
    dimension_budget: tuple
    achieved_total_dof: int
    total_dof: int

    @property
    def ranks_ok(self):
        return tuple(r == q for r, q in zip(self.signal_ranks, self.required_ranks))

    def passed(self, tol=DEFAULT_TOLERANCES):
        return (
            self.max_zf_residual < tol.zero_forcing
            and all(self.ranks_ok)
            and all(c.holds for c in self.dimension_budget)
            and self.achieved_total_dof == self.total_dof
        )

    def to_dict(self):
        return {
            "passed": self.passed(),
            "max_zf_residual": self.max_zf_residual,
            "signal_ranks": list(self.signal_ranks),
            "required_ranks": list(self.required_ranks),
            "min_singular_values": list(self.min_singular_values),
            "dimension_budget": [c.to_dict() for c in self.dimension_budget],
            "achieved_total_dof": self.achieved_total_dof,
            "total_dof": self.total_dof,
        }

    def table(self):
        lines = [f"{'rx':>3} {'rank':>5} {'need':>5} {'min sv':>10}"]
        for k, (r, q, s) in enumerate(
            zip(self.signal_ranks, self.required_ranks, self.min_singular_values), start=1
        ):
            lines.append(f"{k:>3} {r:>5} {q:>5} {s:>10.3e}")
        lines.append(f"max ZF residual : {self.max_zf_residual:.3e}")
        lines.append(f"achieved DoF    : {self.achieved_total_dof} / {self.total_dof}")
        lines.append(f"verdict         : {'PASS' if self.passed() else 'FAIL'}")
        return "\n".join(lines)


def _leakage(U, H, V):
    """Largest ``|u^H H v| / (|u| |H| |v|)`` over column pairs."""
    if U.shape[1] == 0 or V.shape[1] == 0:
        return 0.0
    G = np.abs(U.conj().T @ H @ V)
    scale = np.outer(np.linalg.norm(U, axis=0), np.linalg.norm(V, axis=0)) * np.linalg.norm(H, 2)
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.where(scale > 0, G / np.where(scale > 0, scale, 1.0), 0.0)
    return float(ratio.max())


def _receiver_leakage(tx, channels, config, k, macs):
    return max(
        (_leakage(tx.receivers[k], channels.H(k, u), tx.precoders[u]) for u in config.users(macs)),
        default=0.0,
    )


def zf_residual(tx, channels, config):
    """Largest normalized leakage over every aligned (receiver, interferer) pair.

    Covers receivers ``1..k_IAC`` against MACs after them; zero when there
    is nothing to align.
    """
    t = compute_k_iac(config).value
    return max(
        (_receiver_leakage(tx, channels, config, k, range(k + 1, config.K + 1))
         for k in range(1, t + 1)),
        default=0.0,
    )


def _rank(A, tol):
    if A.size == 0:
        return 0
    s = np.linalg.svd(A, compute_uv=False)
    if s[0] == 0:
        return 0
    return int(np.sum(s > tol.rank_rel * s[0]))


def _signals(tx, channels, config, k):
    return np.hstack([channels.H(k, u) @ tx.precoders[u] for u in config.users([k])])


def signal_rank_check(tx, channels, config, tol=DEFAULT_TOLERANCES):
    """Per receiver ``(rank of U_k^H S_k, required D_k)``."""
    out = []
    for k in range(1, config.K + 1):
        S = _signals(tx, channels, config, k)
        out.append((_rank(tx.receivers[k].conj().T @ S, tol), config.D(k)))
    return out


def dimension_budget(config, plan):
    """Signal streams plus basis size must fit in ``M`` at every aligning receiver."""
    return [
        InequalityCheck(f"budget[k={rp.receiver}]", config.D(rp.receiver) + len(rp.basis), config.M)
        for rp in plan.receivers
    ]


def independence_margins(tx, channels, config):
    """Smallest singular value of ``[unit signal columns | interference basis]`` per receiver."""
    out = []
    for k in range(1, config.K + 1):
        S = _signals(tx, channels, config, k)
        S = S / np.linalg.norm(S, axis=0, keepdims=True)
        A = np.hstack([S, tx.interference_bases[k]])
        out.append(float(np.linalg.svd(A, compute_uv=False)[-1]))
    return out


def achieved_dof(tx, channels, config, tol=DEFAULT_TOLERANCES):
    """Streams decodable when receivers decode in order ``1..K`` with error-free cancellation.

    Receiver ``k`` sees MACs ``1..k-1`` already cancelled; it contributes
    ``D_k`` when its leakage from MACs ``k+1..K`` is below the zero-forcing
    threshold and its effective signal matrix has full rank.
    """
    total = 0
    ranks = signal_rank_check(tx, channels, config, tol)
    for k in range(1, config.K + 1):
        leak = _receiver_leakage(tx, channels, config, k, range(k + 1, config.K + 1))
        rank, need = ranks[k - 1]
        if leak < tol.zero_forcing and rank == need:
            total += need
    return total


def verify(tx, channels, config, plan=None, tol=DEFAULT_TOLERANCES):
    """Run every check and collect a :class:`VerificationReport`."""
    plan = tx.plan if plan is None else plan
    ranks = signal_rank_check(tx, channels, config, tol)
    return VerificationReport(
        max_zf_residual=zf_residual(tx, channels, config),
        signal_ranks=tuple(r for r, _ in ranks),
        required_ranks=tuple(q for _, q in ranks),
        min_singular_values=tuple(independence_margins(tx, channels, config)),
        dimension_budget=tuple(dimension_budget(config, plan)) if plan is not None else (),
        achieved_total_dof=achieved_dof(tx, channels, config, tol),
        total_dof=total_dof(config),
    )
