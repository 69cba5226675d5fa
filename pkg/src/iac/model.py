"""System configurations, random channels and the derived stream counts.

Indices follow the usual notation of the interference MAC literature and are
**1-based**: MAC (and receiver) ``k`` runs over ``1..K``, user ``j`` over
``1..N_k`` and stream ``l`` over ``1..d[j,k]``.  Python containers are
still 0-based, so ``config.dof[k - 1][j - 1]`` is the DoF of user ``(j, k)``.
"""

import json
import numbers
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from ._seeding import substream
from .exceptions import (
    ConfigError,
    DimensionMismatchError,
    DofRangeError,
    UnseparableTailError,
)

__all__ = [
    "UserId",
    "SystemConfig",
    "ChannelSet",
    "KIacIndex",
    "make_config",
    "config_from_dict",
    "config_to_dict",
    "load_config",
    "sample_channels",
    "compute_k_iac",
    "total_dof",
    "sample_dof_tuple",
]


class UserId(NamedTuple):
    """User ``j`` of MAC ``mac`` (both 1-based)."""

    mac: int
    user: int


@dataclass(frozen=True)
class SystemConfig:
    """A (K, M, J) interference MAC instance with its DoF tuple."""

    K: int
    M: int
    group_sizes: tuple
    dof: tuple

    @property
    def J(self):
        return sum(self.group_sizes)

    @property
    def mac_dof(self):
        """Per-MAC stream totals ``D_k = sum_j d[j,k]`` (0-based tuple)."""
        return tuple(sum(d) for d in self.dof)

    def D(self, k):
        """Stream total of MAC ``k`` (1-based)."""
        return sum(self.dof[k - 1])

    def tail(self, k):
        """Streams of MACs ``k..K``; zero for ``k > K``."""
        return sum(self.mac_dof[k - 1:]) if k <= self.K else 0

    def d(self, user):
        mac, j = user
        return self.dof[mac - 1][j - 1]

    def users(self, macs=None):
        """All users, optionally restricted to MACs in ``macs``, in lexicographic order."""
        out = []
        for k in range(1, self.K + 1):
            if macs is not None and k not in macs:
                continue
            out.extend(UserId(k, j) for j in range(1, self.group_sizes[k - 1] + 1))
        return out

    def __str__(self):
        dof = ",".join("[" + ",".join(map(str, d)) + "]" for d in self.dof)
        return f"SystemConfig(K={self.K}, M={self.M}, dof=({dof}))"


def _check_int(name, value, minimum):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise ConfigError(f"{name} must be an integer, got {value!r}")
    if value < minimum:
        raise ConfigError(f"{name} must be >= {minimum}, got {value}")
    return int(value)


def make_config(K, M, group_sizes, dof):
    """Validate and build a :class:`SystemConfig`.

    Raises
    ------
    DimensionMismatchError
        If ``len(group_sizes) != K`` or ``len(dof[k]) != N_k``.
    DofRangeError
        If any per-user DoF lies outside ``[1, M]``.
    """
    K = _check_int("K", K, 1)
    M = _check_int("M", M, 1)
    groups = tuple(_check_int("group size", n, 1) for n in group_sizes)
    if len(groups) != K:
        raise DimensionMismatchError(f"expected {K} group sizes, got {len(groups)}")
    if len(dof) != K:
        raise DimensionMismatchError(f"expected {K} DoF lists, got {len(dof)}")
    rows = []
    for k, (n, row) in enumerate(zip(groups, dof), start=1):
        row = tuple(row)
        if len(row) != n:
            raise DimensionMismatchError(
                f"MAC {k} declares {n} users but lists {len(row)} DoF values"
            )
        for j, d in enumerate(row, start=1):
            if isinstance(d, bool) or not isinstance(d, numbers.Integral):
                raise ConfigError(f"d[{j},{k}] must be an integer, got {d!r}")
            if not 1 <= d <= M:
                raise DofRangeError(f"d[{j},{k}] = {d} outside [1, M={M}]")
        rows.append(tuple(int(d) for d in row))
    return SystemConfig(K, M, groups, tuple(rows))


_CONFIG_KEYS = {"K", "M", "groups", "dof"}


def config_from_dict(data):
    """Build a config from its JSON object form; unknown keys are rejected."""
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    extra = set(data) - _CONFIG_KEYS
    if extra:
        raise ConfigError(f"unknown config keys: {sorted(extra)}")
    missing = _CONFIG_KEYS - set(data)
    if missing:
        raise ConfigError(f"missing config keys: {sorted(missing)}")
    if not isinstance(data["groups"], list):
        raise ConfigError("field 'groups' must be a list of integers")
    if not isinstance(data["dof"], list) or not all(isinstance(r, list) for r in data["dof"]):
        raise ConfigError("field 'dof' must be a list of lists of integers")
    return make_config(data["K"], data["M"], data["groups"], data["dof"])


def config_to_dict(config):
    return {
        "K": config.K,
        "M": config.M,
        "groups": list(config.group_sizes),
        "dof": [list(row) for row in config.dof],
    }


def load_config(path):
    """Read a config JSON file; parse errors carry line/field context."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    try:
        return config_from_dict(data)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


@dataclass(frozen=True)
class ChannelSet:
    """One M x M complex channel per (receiver, user) pair.

    ``matrices[(k, user)]`` is the channel from ``user`` to receiver ``k``.
    Stored arrays are read-only.
    """

    config: SystemConfig
    matrices: dict = field(repr=False)
    seed: object = None

    def __post_init__(self):
        M = self.config.M
        expected = {(k, u) for k in range(1, self.config.K + 1) for u in self.config.users()}
        if set(self.matrices) != expected:
            raise ConfigError("channel set does not cover every (receiver, user) pair")
        for key, H in self.matrices.items():
            if H.shape != (M, M):
                raise ConfigError(f"channel {key} has shape {H.shape}, expected {(M, M)}")
            if not np.all(np.isfinite(H)):
                raise ConfigError(f"channel {key} has non-finite entries")
            H.setflags(write=False)

    def H(self, k, user):
        """Channel from ``user`` (a :class:`UserId` or ``(mac, j)``) to receiver ``k``."""
        return self.matrices[(k, UserId(*user))]

    def scaled(self, factor):
        """A copy with every matrix multiplied by ``factor``."""
        return ChannelSet(
            self.config,
            {key: np.array(H * factor) for key, H in self.matrices.items()},
            self.seed,
        )

    @classmethod
    def from_function(cls, config, fn, seed=None):
        """Build a channel set from ``fn(k, user) -> M x M array``."""
        mats = {
            (k, u): np.array(fn(k, u), dtype=complex)
            for k in range(1, config.K + 1)
            for u in config.users()
        }
        return cls(config, mats, seed)


def sample_channels(config, seed):
    """Draw i.i.d. unit-variance circularly-symmetric complex Gaussian channels.

    The result is a deterministic function of ``(config, seed)``.
    """
    rng = substream(seed, "channels")
    M = config.M
    mats = {}
    for k in range(1, config.K + 1):
        for u in config.users():
            z = rng.standard_normal((M, M, 2))
            mats[(k, u)] = (z[..., 0] + 1j * z[..., 1]) / np.sqrt(2.0)
    return ChannelSet(config, mats, seed)


@dataclass(frozen=True)
class KIacIndex:
    """Index of the last receiver that still needs alignment (0 if none)."""

    value: int

    @property
    def trivial(self):
        return self.value == 0


def compute_k_iac(config):
    """Locate the last receiver whose interference must be aligned.

    ``value`` is one less than the first MAC ``k`` for which the streams of
    MACs ``k..K`` fit in ``M`` dimensions.

    Raises
    ------
    UnseparableTailError
        If the last MAC alone carries more than ``M`` streams.
    """
    if config.D(config.K) > config.M:
        raise UnseparableTailError(
            f"MAC {config.K} carries {config.D(config.K)} streams > M={config.M}"
        )
    for k in range(1, config.K + 1):
        if config.tail(k) <= config.M:
            return KIacIndex(k - 1)
    raise AssertionError("unreachable: tail of MAC K fits")


def total_dof(config):
    return sum(config.mac_dof)


def sample_dof_tuple(K, M, seed):
    """Draw a random configuration with ``N_k ~ U{1..M}``, ``d ~ U{1..floor(M/N_k)}``."""
    rng = substream(seed, "dof-tuple")
    groups, dof = [], []
    for _ in range(K):
        n = int(rng.integers(1, M + 1))
        groups.append(n)
        dof.append([int(x) for x in rng.integers(1, M // n + 1, size=n)])
    return make_config(K, M, groups, dof)
