"""Alignment planning: basis selection and symbol-to-symbol pairings.

At each aligning receiver ``k`` the interference vectors of MACs
``k+1..K`` are split into ``Z_k = M - D_k`` alignment classes.  One member
of every class is the basis vector; each other member is aligned onto it.
A class never holds two streams of the same user, otherwise that user's
precoder would lose rank.
"""

import json
from dataclasses import dataclass
from typing import NamedTuple

from ._seeding import substream
from .exceptions import InfeasibleConfigError, PlanError, PlanNotFoundError
from .feasibility import check_theorem1
from .graph import PseudoforestState
from .model import UserId

__all__ = [
    "StreamId",
    "InterferenceVectorId",
    "ReceiverPlan",
    "AlignmentPlan",
    "streams",
    "enumerate_interference_sets",
    "build_alignment_plan",
    "validate_plan",
    "plan_to_equations",
    "plan_to_dict",
    "plan_from_dict",
]


class StreamId(NamedTuple):
    """Stream ``stream`` of user ``user`` in MAC ``mac`` (all 1-based)."""

    mac: int
    user: int
    stream: int

    @property
    def user_id(self):
        return UserId(self.mac, self.user)


class InterferenceVectorId(NamedTuple):
    """The image of ``source``'s precoding vector at ``receiver``."""

    receiver: int
    source: StreamId


@dataclass(frozen=True)
class ReceiverPlan:
    receiver: int
    basis: tuple
    pairings: tuple

    def classes(self):
        """Basis vector -> list of vectors aligned onto it (basis first)."""
        out = {b: [b] for b in self.basis}
        for aligned, onto in self.pairings:
            out[onto].append(aligned)
        return out


@dataclass(frozen=True)
class AlignmentPlan:
    """Basis and pairings for receivers ``1..k_iac``."""

    k_iac: int
    receivers: tuple

    def at(self, k):
        return self.receivers[k - 1]

    @property
    def n_equations(self):
        return sum(len(rp.pairings) for rp in self.receivers)


def streams(config, macs=None):
    """Every stream id, lexicographic in ``(mac, user, stream)``."""
    return [
        StreamId(u.mac, u.user, s)
        for u in config.users(macs)
        for s in range(1, config.d(u) + 1)
    ]


def enumerate_interference_sets(config):
    """Per receiver ``k``: ``(aligned set, cancelled set)`` of interference vector ids.

    The aligned set holds images of MACs ``k+1..K``; the cancelled set those
    of MACs ``1..k-1``.
    """
    out = {}
    for k in range(1, config.K + 1):
        ia = [InterferenceVectorId(k, s) for s in streams(config, range(k + 1, config.K + 1))]
        ic = [InterferenceVectorId(k, s) for s in streams(config, range(1, k))]
        out[k] = (ia, ic)
    return out


def validate_plan(config, plan):
    """Raise :class:`PlanError` unless every structural invariant holds."""
    from .feasibility import phi_count
    from .model import compute_k_iac

    t = compute_k_iac(config).value
    if plan.k_iac != t or len(plan.receivers) != t:
        raise PlanError(f"plan covers {len(plan.receivers)} receivers, k_IAC is {t}")
    sets = enumerate_interference_sets(config)
    for k, rp in enumerate(plan.receivers, start=1):
        if rp.receiver != k:
            raise PlanError(f"receiver plans out of order at position {k}")
        ia = set(sets[k][0])
        aligned = [a for a, _ in rp.pairings]
        covered = list(rp.basis) + aligned
        if len(covered) != len(set(covered)) or set(covered) != ia:
            raise PlanError(f"receiver {k}: vectors not covered exactly once")
        if len(rp.basis) != min(len(ia), config.M - config.D(k)):
            raise PlanError(f"receiver {k}: basis size {len(rp.basis)} is wrong")
        basis = set(rp.basis)
        for a, b in rp.pairings:
            if b not in basis:
                raise PlanError(f"receiver {k}: {a} aligned onto non-basis {b}")
        for b, members in rp.classes().items():
            owners = [m.source.user_id for m in members]
            if len(owners) != len(set(owners)):
                raise PlanError(f"receiver {k}: class of {b} holds two streams of one user")
        if len(rp.pairings) != phi_count(config, k):
            raise PlanError(f"receiver {k}: {len(rp.pairings)} pairings, expected phi count")


def plan_to_equations(plan):
    """Flat list of ``(receiver, aligned, onto)`` alignment equations."""
    return [(rp.receiver, a, b) for rp in plan.receivers for a, b in rp.pairings]


def plan_to_dict(plan):
    return {
        "k_iac": plan.k_iac,
        "receivers": [
            {
                "receiver": rp.receiver,
                "basis": [list(b.source) for b in rp.basis],
                "pairings": [[list(a.source), list(b.source)] for a, b in rp.pairings],
            }
            for rp in plan.receivers
        ],
    }


def plan_from_dict(data):
    receivers = []
    for entry in data["receivers"]:
        k = entry["receiver"]

        def vid(triple):
            return InterferenceVectorId(k, StreamId(*triple))

        receivers.append(ReceiverPlan(
            k,
            tuple(vid(b) for b in entry["basis"]),
            tuple((vid(a), vid(b)) for a, b in entry["pairings"]),
        ))
    return AlignmentPlan(data["k_iac"], tuple(receivers))


def plan_to_json(plan):
    return json.dumps(plan_to_dict(plan), indent=2)


_GENERIC_TEST_SEED = 0x1AC


class _Search:
    """Depth-first assignment of interference vectors to alignment classes.

    Each vector either opens a new class (becoming its basis vector) or joins
    an existing one, which adds the edge vector--basis to the IAC graph.
    Options are tried in heuristic order and every option is eventually
    tried, so the search is complete.
    """

    def __init__(self, config, t, rng, generic_check=None):
        self.config = config
        self.t = t
        self.rng = rng
        self.generic_check = generic_check
        self.leaves = 0
        self.rejected = 0
        self.vertices = [s for s in streams(config) if s.mac >= 2]
        self.state = PseudoforestState(self.vertices)
        self.nodes = 0
        self.items = {k: self._order(k) for k in range(1, t + 1)}
        self.Z = {k: config.M - config.D(k) for k in range(1, t + 1)}
        self.phi = {k: len(self.items[k]) - self.Z[k] for k in range(1, t + 1)}
        self.result = {}

    def _capacity_ok(self, k, pending):
        """Necessary condition: enough tree components remain for every later edge.

        Each new edge consumes one acyclic component, and edges formed at
        receivers ``k'..t`` only touch vertices of MACs after ``k'``.
        """
        need = pending + sum(self.phi[j] for j in range(k + 1, self.t + 1))
        for j in range(k, self.t + 1):
            if j > k:
                need -= self.phi[j - 1] if j - 1 > k else pending
            roots = {self.state.find(v) for v in self.vertices if v.mac > j}
            if need > sum(1 for r in roots if not self.state.is_cyclic(r)):
                return False
        return True

    def _order(self, k):
        items = streams(self.config, range(k + 1, self.config.K + 1))
        if self.rng is not None:
            perm = self.rng.permutation(len(items))
            items = [items[i] for i in perm]
        # round-robin over users so the first basis vectors come from distinct users
        items.sort(key=lambda s: s.stream)
        return items

    def _future_weight(self, root, k):
        """Vertices in ``root``'s component that later receivers still align."""
        if k + 1 > self.t:
            return 0
        return sum(1 for v in self.vertices if v.mac > k + 1 and self.state.find(v) == root)

    def _options(self, k, x, classes, remaining):
        opens = len(classes)
        must_open = remaining == self.Z[k] - opens
        options = []
        if opens < self.Z[k]:
            options.append((-1.0, None))
        if must_open:
            return options
        for ci, (center, owners, _) in enumerate(classes):
            if x.user_id in owners:
                continue
            kind = self.state.probe(x, center)
            if kind is None:
                continue
            if kind == "merge-trees":
                cost = 0.0
            elif kind == "close-cycle":
                cost = 1.0 + self._future_weight(self.state.find(x), k)
            else:
                tree = x if not self.state.is_cyclic(x) else center
                cost = 1.0 + self._future_weight(self.state.find(tree), k)
            options.append((cost + 1e-3 * len(owners), ci))
        options.sort(key=lambda o: o[0])
        return options

    def run(self):
        if not self._receiver(1):
            raise PlanNotFoundError(
                f"no pseudoforest plan for {self.config} after {self.nodes} search nodes"
            )
        return self.result

    def _receiver(self, k):
        if k > self.t:
            self.leaves += 1
            if self.generic_check is None or self.generic_check(_to_plan(self.result, self.t)):
                return True
            self.rejected += 1
            return False
        return self._assign(k, 0, [])

    def _assign(self, k, pos, classes):
        self.nodes += 1
        items = self.items[k]
        if pos == len(items):
            self.result[k] = [(c, list(m)) for c, _, m in classes]
            return self._receiver(k + 1)
        x = items[pos]
        pending = (len(items) - pos) - (self.Z[k] - len(classes))
        if not self._capacity_ok(k, pending):
            return False
        for _, ci in self._options(k, x, classes, len(items) - pos):
            if ci is None:
                classes.append((x, {x.user_id}, []))
                if self._assign(k, pos + 1, classes):
                    return True
                classes.pop()
                continue
            center, owners, members = classes[ci]
            mark = self.state.mark()
            if not self.state.try_add_edge(x, center, k):
                continue
            owners.add(x.user_id)
            members.append(x)
            if self._assign(k, pos + 1, classes):
                return True
            members.pop()
            owners.discard(x.user_id)
            self.state.rollback(mark)
        return False


def build_alignment_plan(config, seed=None, generic_check=True):
    """Find a basis/pairing plan whose IAC graph is a pseudoforest.

    With ``seed=None`` ties are broken lexicographically; an integer seed
    shuffles the candidate order reproducibly.  With ``generic_check`` each
    complete plan must also pass :func:`generically_solvable`; otherwise the
    search backtracks and keeps looking.

    Raises
    ------
    InfeasibleConfigError
        If the closed-form existence conditions fail.
    PlanNotFoundError
        If the complete search finds nothing (a defect when the conditions hold).
    """
    report = check_theorem1(config)
    if not report.closed_form_feasible:
        raise InfeasibleConfigError(
            f"{config} fails {', '.join(report.failing())}"
        )
    t = report.k_iac
    if t == 0:
        return AlignmentPlan(0, ())
    rng = None if seed is None else substream(seed, "planner")
    check = (lambda plan: generically_solvable(config, plan)) if generic_check else None
    return _to_plan(_Search(config, t, rng, check).run(), t)


def _to_plan(found, t):
    receivers = []
    for k in range(1, t + 1):
        basis, pairings = [], []
        for center, members in found[k]:
            b = InterferenceVectorId(k, center)
            basis.append(b)
            pairings.extend((InterferenceVectorId(k, m), b) for m in members)
        receivers.append(ReceiverPlan(k, tuple(sorted(basis)), tuple(sorted(pairings))))
    return AlignmentPlan(t, tuple(receivers))


def generically_solvable(config, plan):
    """Randomized rank test: solve the plan once on a private random channel draw.

    A plan whose loops force two streams of one user onto the same line (or
    otherwise lose rank) fails for every channel draw; a sound plan passes
    with probability one.
    """
    from .exceptions import SolverError
    from .model import sample_channels
    from .solver import solve_all
    from .verify import verify

    channels = sample_channels(config, _GENERIC_TEST_SEED)
    try:
        tx = solve_all(config, channels, seed=_GENERIC_TEST_SEED, plan=plan)
    except SolverError:
        return False
    return verify(tx, channels, config, plan).passed()
