"""Existence conditions, necessary conditions and DoF baselines.

Every inequality is evaluated in exact integer arithmetic and recorded with
both sides so a report can be audited after the fact.
"""

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .exceptions import (
    ConstructionImpossibleError,
    IacIndexError,
    SubsetUniverseTooLargeError,
)
from .model import UserId, compute_k_iac, make_config

__all__ = [
    "InequalityCheck",
    "FeasibilityReport",
    "SubsetIndex",
    "EXHAUSTIVE_SUBSET_CAP",
    "upsilon",
    "check_theorem1",
    "check_theorem3",
    "check_feasibility",
    "screen_infeasible",
    "phi_count",
    "make_max_dof_config",
    "ia_baselines",
]

#: Largest index universe for which every subset of the counting condition
#: is enumerated.
EXHAUSTIVE_SUBSET_CAP = 16


@dataclass(frozen=True)
class InequalityCheck:
    """One evaluated inequality ``lhs <= rhs`` (or ``>=``, see ``relation``)."""

    name: str
    lhs: int
    rhs: int
    relation: str = "<="

    @property
    def holds(self):
        if self.relation == "<=":
            return self.lhs <= self.rhs
        if self.relation == ">=":
            return self.lhs >= self.rhs
        if self.relation == "<":
            return self.lhs < self.rhs
        raise ValueError(self.relation)

    def to_dict(self):
        return {"name": self.name, "lhs": self.lhs, "rhs": self.rhs, "holds": self.holds}


@dataclass(frozen=True)
class SubsetIndex:
    """A set of ``(receiver k, interfering user)`` pairs.

    Valid pairs have ``1 <= k <= k_IAC`` and ``user.mac > k``.
    """

    pairs: frozenset

    @classmethod
    def of(cls, pairs):
        return cls(frozenset((int(k), UserId(*u)) for k, u in pairs))

    def validate(self, config, k_iac):
        for k, u in self.pairs:
            if not (1 <= k <= k_iac and k < u.mac <= config.K
                    and 1 <= u.user <= config.group_sizes[u.mac - 1]):
                raise IacIndexError(f"pair ({k}, {tuple(u)}) outside the index set")

    def __len__(self):
        return len(self.pairs)


@dataclass
class FeasibilityReport:
    """Verdicts of the closed-form existence and IAC necessary conditions.

    Existence checks live in ``thm1_*``; necessary conditions in ``thm3_*``
    plus ``eq22_screen``.  Parts that were not evaluated stay empty / ``None``.
    """

    k_iac: int
    thm1_eq9: list = field(default_factory=list)
    thm1_eq10: InequalityCheck = None
    thm1_eq11: InequalityCheck = None
    thm3_eq19: list = field(default_factory=list)
    thm3_eq20: InequalityCheck = None
    thm3_eq21: list = field(default_factory=list)
    eq22_screen: InequalityCheck = None

    @property
    def theorem1_evaluated(self):
        return self.thm1_eq10 is not None

    @property
    def theorem3_evaluated(self):
        return self.thm3_eq20 is not None

    @property
    def closed_form_feasible(self):
        if not self.theorem1_evaluated:
            return None
        checks = list(self.thm1_eq9) + [self.thm1_eq10]
        if self.thm1_eq11 is not None:
            checks.append(self.thm1_eq11)
        return all(c.holds for c in checks)

    @property
    def not_proven_infeasible(self):
        if not self.theorem3_evaluated:
            return None
        checks = list(self.thm3_eq19) + [self.thm3_eq20] + list(self.thm3_eq21)
        return all(c.holds for c in checks) and not self.eq22_screen.holds

    def failing(self):
        """Names of every violated inequality (the screen counts when it fires)."""
        out = []
        for c in self.all_checks():
            if c is self.eq22_screen:
                if c.holds:
                    out.append(c.name)
            elif not c.holds:
                out.append(c.name)
        return out

    def all_checks(self):
        out = list(self.thm1_eq9)
        out += [c for c in (self.thm1_eq10, self.thm1_eq11) if c is not None]
        out += list(self.thm3_eq19)
        out += [c for c in (self.thm3_eq20,) if c is not None]
        out += list(self.thm3_eq21)
        if self.eq22_screen is not None:
            out.append(self.eq22_screen)
        return out

    def to_dict(self):
        return {
            "k_iac": self.k_iac,
            "closed_form_feasible": self.closed_form_feasible,
            "not_proven_infeasible": self.not_proven_infeasible,
            "inequalities": [c.to_dict() for c in self.all_checks()],
            "failing": self.failing(),
        }


def _user_label(u):
    return f"[{u.user},{u.mac}]"


def _theorem1_into(report, config):
    t = report.k_iac
    M = config.M
    for k in range(1, t + 1):
        worst = max(config.d(u) for u in config.users(range(k + 1, config.K + 1)))
        report.thm1_eq9.append(InequalityCheck(f"eq9[k={k}]", config.D(k) + worst, M))
    report.thm1_eq10 = InequalityCheck(f"eq10[k_iac={t}]", config.tail(t + 1), M)
    if t >= 1:
        lhs = config.D(1)
        lhs += sum((k - 1) * config.D(k) for k in range(1, t + 1))
        lhs += sum((t - 1) * config.D(k) for k in range(t + 1, config.K + 1))
        report.thm1_eq11 = InequalityCheck("eq11", lhs, t * M)
    return report


def check_theorem1(config):
    """Evaluate the closed-form existence conditions.

    The per-receiver basis bound is applied at every receiver that aligns
    (``k = 1..k_IAC``); with ``k_IAC = 0`` only the separability bound is
    evaluated and the configuration is trivially feasible.
    """
    report = FeasibilityReport(k_iac=compute_k_iac(config).value)
    return _theorem1_into(report, config)


def upsilon(config, k_iac=None):
    """The full index set of ``(k, user)`` pairs with ``k <= k_IAC < ...``."""
    t = compute_k_iac(config).value if k_iac is None else k_iac
    return SubsetIndex(frozenset(
        (k, u) for k in range(1, t + 1) for u in config.users(range(k + 1, config.K + 1))
    ))


def _eq21_check(config, subset, name):
    M = config.M
    recv = {k for k, _ in subset.pairs}
    users = {u for _, u in subset.pairs}
    lhs = sum(config.D(k) * (M - config.D(k)) for k in recv)
    lhs += sum(config.d(u) * (M - config.d(u)) for u in users)
    rhs = sum(config.D(k) * config.d(u) for k, u in subset.pairs)
    return InequalityCheck(name, lhs, rhs, ">=")


def _exhaustive_eq21(config, universe):
    """Evaluate the counting condition on every nonempty subset of ``universe``.

    Works on bitmasks: each receiver and user contributes its variable count
    once whenever any of its pairs is in the subset.
    """
    M = config.M
    n = len(universe)
    masks = np.arange(1, 1 << n, dtype=np.int64)
    lhs = np.zeros(masks.shape, dtype=np.int64)
    rhs = np.zeros(masks.shape, dtype=np.int64)
    owner_bits = {}
    for bit, (k, u) in enumerate(universe):
        owner_bits.setdefault(("k", k), 0)
        owner_bits[("k", k)] |= 1 << bit
        owner_bits.setdefault(("u", u), 0)
        owner_bits[("u", u)] |= 1 << bit
        rhs += ((masks >> bit) & 1) * (config.D(k) * config.d(u))
    for (kind, key), bits in owner_bits.items():
        if kind == "k":
            weight = config.D(key) * (M - config.D(key))
        else:
            weight = config.d(key) * (M - config.d(key))
        lhs += ((masks & bits) != 0) * weight
    checks = []
    for mask, a, b in zip(masks.tolist(), lhs.tolist(), rhs.tolist()):
        members = [universe[i] for i in range(n) if mask >> i & 1]
        label = ",".join(f"({k},{_user_label(u)})" for k, u in members)
        checks.append(InequalityCheck(f"eq21[{label}]", a, b, ">="))
    return checks


def _theorem3_into(report, config, subsets):
    t = report.k_iac
    M = config.M
    for k in range(1, t + 1):
        for u in config.users(range(k + 1, config.K + 1)):
            report.thm3_eq19.append(InequalityCheck(
                f"eq19[k={k},user={_user_label(u)}]", config.D(k) + config.d(u), M
            ))
    report.thm3_eq20 = InequalityCheck(f"eq20[k_iac={t}]", config.tail(t + 1), M)
    if subsets:
        for i, s in enumerate(subsets):
            s.validate(config, t)
            label = "full" if s == upsilon(config, t) else str(i)
            report.thm3_eq21.append(_eq21_check(config, s, f"eq21[{label}]"))
    else:
        universe = sorted(upsilon(config, t).pairs)
        if len(universe) > EXHAUSTIVE_SUBSET_CAP:
            raise SubsetUniverseTooLargeError(
                f"{len(universe)} index pairs; exhaustive mode is capped at "
                f"{EXHAUSTIVE_SUBSET_CAP}. Pass explicit subsets instead."
            )
        if universe:
            report.thm3_eq21.extend(_exhaustive_eq21(config, universe))
    report.eq22_screen = _eq22_check(config, t)
    return report


def check_theorem3(config, subsets=None):
    """Evaluate the necessary conditions for IAC achievability.

    The per-pair basis bound is checked on every ``(k, user)`` pair of the
    index set.  The variable/equation counting condition is checked on each
    subset in ``subsets``; when ``subsets`` is empty or ``None`` every nonempty
    subset of the index set is enumerated, provided the set has at most
    :data:`EXHAUSTIVE_SUBSET_CAP` pairs.
    """
    report = FeasibilityReport(k_iac=compute_k_iac(config).value)
    return _theorem3_into(report, config, subsets)


def check_feasibility(config, subsets=None):
    """Both checks in one report.

    Falls back to the full-set counting condition when the index set is
    too large to enumerate and no subsets were given.
    """
    report = FeasibilityReport(k_iac=compute_k_iac(config).value)
    _theorem1_into(report, config)
    if not subsets and len(upsilon(config, report.k_iac)) > EXHAUSTIVE_SUBSET_CAP:
        subsets = [upsilon(config, report.k_iac)]
    return _theorem3_into(report, config, subsets)


def _eq22_check(config, t):
    M = config.M
    lhs = sum(config.D(k) * (M - config.D(k)) for k in range(1, t + 1))
    lhs += sum(config.d(u) * (M - config.d(u)) for u in config.users(range(2, config.K + 1)))
    rhs = sum(config.D(k) * config.tail(k + 1) for k in range(1, t + 1))
    return InequalityCheck("eq22", lhs, rhs, "<")


def screen_infeasible(config):
    """True when the full-set counting argument proves the tuple unachievable."""
    return _eq22_check(config, compute_k_iac(config).value).holds


def phi_count(config, k):
    """Number of alignment equations formed at receiver ``k`` (``1 <= k <= k_IAC``)."""
    t = compute_k_iac(config).value
    if not 1 <= k <= t:
        raise IacIndexError(f"receiver {k} outside [1, k_IAC={t}]")
    return max(0, config.tail(k + 1) - (config.M - config.D(k)))


def make_max_dof_config(K, M):
    """A configuration achieving the closed-form maximum of ``2M`` streams.

    MACs 1 and 2 carry ``floor(M/2)`` and ``ceil(M/2)`` streams; ``M`` unit
    streams are dealt round-robin over MACs ``3..K``, and each of those MACs
    is split into users of at most ``floor(M/2)`` streams.
    """
    if K < 3 or M < 2:
        raise ConstructionImpossibleError(f"need K >= 3 and M >= 2, got K={K}, M={M}")
    if K - 2 > M:
        raise ConstructionImpossibleError(
            f"{K - 2} MACs cannot share {M} streams with at least one each"
        )
    tail = [0] * (K - 2)
    for i in range(M):
        tail[i % (K - 2)] += 1
    cap = M // 2
    dof = [[M // 2], [M - M // 2]]
    for total in tail:
        users = [cap] * (total // cap)
        if total % cap:
            users.append(total % cap)
        dof.append(users)
    return make_config(K, M, [len(row) for row in dof], dof)


def ia_baselines(K, M):
    """IA reference points: equal-DoF maximum ``2MK/(K+1)`` and general bound ``2M-1``."""
    return Fraction(2 * M * K, K + 1), Fraction(2 * M - 1)
