"""Closed-form transceivers from an alignment plan.

Precoders of MACs ``2..K`` come from walking each component of the IAC
graph: a loop fixes its seed vector as an eigenvector of the chain matrix,
a tree takes a random seed.  MAC-1 precoders are pulled back from the
orthogonal complement of receiver 1's interference, and every receiver
zero-forces what remains after cancellation.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from ._seeding import substream
from .exceptions import (
    ComplementTooSmallError,
    DependentColumnsError,
    EigenFailureError,
    InfeasibleConfigError,
    InsufficientSpaceError,
    SingularChannelError,
)
from .feasibility import check_theorem1
from .graph import build_graph, check_proposition1, components, traversal_order
from .model import UserId
from .planner import build_alignment_plan, plan_from_dict, plan_to_dict, streams
from .tolerances import DEFAULT_TOLERANCES

__all__ = [
    "TransceiverSet",
    "chain_matrix",
    "solve_graph_precoders",
    "solve_mac1_precoders",
    "solve_receivers",
    "interference_span",
    "solve_all",
    "transceivers_to_dict",
    "transceivers_from_dict",
]


@dataclass(frozen=True)
class TransceiverSet:
    """Solved precoders, receivers and per-receiver interference bases.

    ``precoders[user]`` is ``M x d`` with unit-norm columns,
    ``receivers[k]`` is ``M x D_k`` with orthonormal columns and
    ``interference_bases[k]`` an orthonormal basis of the interference that
    receiver ``k`` must null.
    """

    config: object
    precoders: dict = field(repr=False)
    receivers: dict = field(repr=False)
    interference_bases: dict = field(repr=False)
    plan: object = None
    channel_seed: object = None

    def __post_init__(self):
        for arr in (*self.precoders.values(), *self.receivers.values(),
                    *self.interference_bases.values()):
            arr.setflags(write=False)


def _unit(v):
    n = np.linalg.norm(v)
    return v / n


def _checked(H, tol):
    s = np.linalg.svd(H, compute_uv=False)
    if s[-1] < tol.singular_channel_rel * s[0]:
        raise SingularChannelError(
            f"channel condition number {s[0] / max(s[-1], 1e-300):.3g} is too large"
        )
    return H


def _H(channels, k, stream):
    return channels.H(k, (stream.mac, stream.user))


def _step(channels, edge, v_src, tol):
    """Propagate along ``edge``: ``v_dst ~ (H_k^dst)^-1 H_k^src v_src``."""
    k = edge.label
    H_dst = _checked(_H(channels, k, edge.dst), tol)
    return _unit(np.linalg.solve(H_dst, _H(channels, k, edge.src) @ v_src))


def chain_matrix(cycle, channels, tol=DEFAULT_TOLERANCES):
    """Product of edge maps around a loop; the loop's seed must be its eigenvector.

    Each oriented edge ``src -> dst`` at receiver ``k`` contributes
    ``(H_k^dst)^-1 H_k^src``, the first edge applied first.
    """
    M = channels.config.M
    T = np.eye(M, dtype=complex)
    for edge in cycle:
        k = edge.label
        H_dst = _checked(_H(channels, k, edge.dst), tol)
        T = np.linalg.solve(H_dst, _H(channels, k, edge.src) @ T)
    return T


def _eigen_candidates(T):
    """Unit eigenvectors of ``T`` by decreasing ``|lambda|`` (smallest index on ties)."""
    try:
        w, V = np.linalg.eig(T)
    except np.linalg.LinAlgError as exc:
        raise EigenFailureError(str(exc)) from exc
    if not np.all(np.isfinite(w)) or not np.all(np.isfinite(V)):
        raise EigenFailureError("non-finite eigen decomposition")
    order = sorted(range(len(w)), key=lambda i: (-abs(w[i]), i))
    return [(_unit(V[:, i]), w[i]) for i in order]


def _loop_seed(T):
    return _eigen_candidates(T)[0]


def _random_unit(rng, M):
    z = rng.standard_normal((M, 2))
    return _unit(z[:, 0] + 1j * z[:, 1])


def _propagate(trav, seed_vector, channels, tol):
    out = {trav.seed: seed_vector}
    for edge in trav.cycle[:-1]:
        out[edge.dst] = _step(channels, edge, out[edge.src], tol)
    for edge in trav.tree:
        out[edge.dst] = _step(channels, edge, out[edge.src], tol)
    return out


def _keeps_rank(vectors, new, tol):
    """True if adding ``new`` leaves every touched user's columns independent."""
    for user in {s.user_id for s in new}:
        cols = [v for s, v in {**vectors, **new}.items() if s.user_id == user]
        if len(cols) > 1 and np.linalg.svd(np.column_stack(cols), compute_uv=False)[-1] < tol.dependent_columns:
            return False
    return True


def solve_graph_precoders(graph, channels, seed=0, tol=DEFAULT_TOLERANCES):
    """Unit precoding vector for every vertex of the IAC graph.

    Returns a ``StreamId -> vector`` map.  Components are processed in order;
    the random seed of tree component ``q`` is drawn from its own substream.
    A loop takes the eigenvector of largest ``|lambda|`` unless that would make
    some user's streams collinear with ones already solved (as happens when
    two loops share the same chain matrix); then the next eigenvector in
    decreasing ``|lambda|`` order that avoids it is used.
    """
    if not check_proposition1(graph):
        raise InfeasibleConfigError("IAC graph has a component with more than one loop")
    M = channels.config.M
    vectors = {}
    for comp in components(graph):
        trav = traversal_order(comp, graph)
        if trav.cycle:
            candidates = [
                _propagate(trav, v, channels, tol)
                for v, _ in _eigen_candidates(chain_matrix(trav.cycle, channels, tol))
            ]
            chosen = next((c for c in candidates if _keeps_rank(vectors, c, tol)), candidates[0])
        else:
            chosen = _propagate(trav, _random_unit(substream(seed, "tree-seed", comp.index), M), channels, tol)
        vectors.update(chosen)
    return vectors


def _assemble(config, vectors, macs, tol):
    out = {}
    for u in config.users(macs):
        V = np.column_stack([vectors[s] for s in streams(config) if s.user_id == u])
        s = np.linalg.svd(V, compute_uv=False)
        if s[-1] < tol.dependent_columns:
            raise DependentColumnsError(
                f"precoder of user {tuple(u)} has smallest singular value {s[-1]:.3g}"
            )
        out[u] = V
    return out


def _orth(A, tol):
    """Orthonormal basis of the column space of ``A`` (relative rank threshold)."""
    M = A.shape[0]
    if A.shape[1] == 0:
        return np.zeros((M, 0), dtype=complex)
    U, s, _ = np.linalg.svd(A)
    if s.size == 0 or s[0] == 0:
        return np.zeros((M, 0), dtype=complex)
    r = int(np.sum(s > tol.rank_rel * s[0]))
    return U[:, :r]


def _complement(B):
    """Orthonormal basis of the orthogonal complement of orthonormal ``B``."""
    M = B.shape[0]
    if B.shape[1] == 0:
        return np.eye(M, dtype=complex)
    U, _, _ = np.linalg.svd(B)
    return U[:, B.shape[1]:]


def interference_span(config, channels, precoders, k, tol=DEFAULT_TOLERANCES):
    """Orthonormal basis of the interference receiver ``k`` must null (MACs ``k+1..K``)."""
    cols = [channels.H(k, u) @ precoders[u] for u in config.users(range(k + 1, config.K + 1))]
    if not cols:
        return np.zeros((config.M, 0), dtype=complex)
    return _orth(np.hstack(cols), tol)


def solve_mac1_precoders(config, channels, interference_basis_1, tol=DEFAULT_TOLERANCES):
    """MAC-1 precoders pulled back from the complement of receiver 1's interference.

    Users of MAC 1 take contiguous, disjoint slices of an orthonormal basis of
    the complement, in user order.
    """
    C = _complement(interference_basis_1)
    need = config.D(1)
    if C.shape[1] < need:
        raise InsufficientSpaceError(
            f"complement at receiver 1 has dimension {C.shape[1]} < {need} streams"
        )
    out, start = {}, 0
    for u in config.users([1]):
        d = config.d(u)
        target = C[:, start:start + d]
        start += d
        H = _checked(channels.H(1, u), tol)
        V = np.linalg.solve(H, target)
        out[u] = V / np.linalg.norm(V, axis=0, keepdims=True)
    return out


def solve_receivers(config, channels, precoders, tol=DEFAULT_TOLERANCES):
    """Zero-forcing receivers ``U_k`` and the interference bases they null.

    ``U_k`` spans the projection of the desired signals onto the complement of
    the post-cancellation interference, so it has exactly ``D_k`` orthonormal
    columns.
    """
    receivers, bases = {}, {}
    for k in range(1, config.K + 1):
        Ik = interference_span(config, channels, precoders, k, tol)
        D = config.D(k)
        if Ik.shape[1] > config.M - D:
            raise ComplementTooSmallError(
                f"receiver {k}: interference spans {Ik.shape[1]} > M - D_k = {config.M - D} dims"
            )
        C = _complement(Ik)
        S = np.hstack([channels.H(k, u) @ precoders[u] for u in config.users([k])])
        W, _, _ = np.linalg.svd(C.conj().T @ S)
        receivers[k] = C @ W[:, :D]
        bases[k] = Ik
    return receivers, bases


def solve_all(config, channels, seed=0, tol=DEFAULT_TOLERANCES, plan=None):
    """Plan, solve precoders for all MACs, then receivers.

    Raises :class:`InfeasibleConfigError` before any numerical work when the
    closed-form existence conditions fail.
    """
    report = check_theorem1(config)
    if not report.closed_form_feasible:
        raise InfeasibleConfigError(f"{config} fails {', '.join(report.failing())}")
    if plan is None:
        plan = build_alignment_plan(config)
    graph = build_graph(config, plan)
    vectors = solve_graph_precoders(graph, channels, seed, tol)
    precoders = _assemble(config, vectors, range(2, config.K + 1), tol)
    I1 = interference_span(config, channels, precoders, 1, tol)
    precoders.update(solve_mac1_precoders(config, channels, I1, tol))
    precoders = {u: precoders[u] for u in config.users()}
    receivers, bases = solve_receivers(config, channels, precoders, tol)
    return TransceiverSet(config, precoders, receivers, bases, plan, channels.seed)


def _encode(A):
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(A)]


def _decode(rows, M):
    if not rows:
        return np.zeros((M, 0), dtype=complex)
    return np.array([[complex(re, im) for re, im in row] for row in rows], dtype=complex)


def transceivers_to_dict(tx):
    from .model import config_to_dict

    return {
        "config": config_to_dict(tx.config),
        "channel_seed": tx.channel_seed,
        "plan": None if tx.plan is None else plan_to_dict(tx.plan),
        "precoders": [
            {"mac": u.mac, "user": u.user, "matrix": _encode(V)}
            for u, V in tx.precoders.items()
        ],
        "receivers": [{"receiver": k, "matrix": _encode(U)} for k, U in tx.receivers.items()],
        "interference_bases": [
            {"receiver": k, "matrix": _encode(B)} for k, B in tx.interference_bases.items()
        ],
    }


def transceivers_from_dict(data):
    from .model import config_from_dict

    config = config_from_dict(data["config"])
    M = config.M
    pre = {UserId(e["mac"], e["user"]): _decode(e["matrix"], M) for e in data["precoders"]}
    rec = {e["receiver"]: _decode(e["matrix"], M) for e in data["receivers"]}
    bases = {e["receiver"]: _decode(e["matrix"], M) for e in data["interference_bases"]}
    plan = None if data.get("plan") is None else plan_from_dict(data["plan"])
    return TransceiverSet(config, pre, rec, bases, plan, data.get("channel_seed"))


def dump_transceivers(tx, fh):
    json.dump(transceivers_to_dict(tx), fh)


def load_transceivers(fh):
    return transceivers_from_dict(json.load(fh))
