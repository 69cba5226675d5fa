import os
import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from iac.exceptions import UnseparableTailError
from iac.feasibility import check_theorem1
from iac.model import make_config, sample_dof_tuple

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture
def c8():
    return make_config(3, 4, (1, 1, 2), ([2], [2], [2, 2]))


@pytest.fixture
def c4():
    return make_config(3, 2, (1, 1, 2), ([1], [1], [1, 1]))


@st.composite
def configs(draw, K_max=5, M_max=6, users_max=None):
    """Arbitrary valid configurations (not necessarily separable or feasible)."""
    K = draw(st.integers(1, K_max))
    M = draw(st.integers(1, M_max))
    cap = M if users_max is None else min(M, users_max)
    dof = []
    for _ in range(K):
        n = draw(st.integers(1, cap))
        dof.append(draw(st.lists(st.integers(1, M), min_size=n, max_size=n)))
    return make_config(K, M, [len(r) for r in dof], dof)


@st.composite
def feasible_configs(draw, K_max=5, M_max=6):
    """Configurations passing the closed-form existence conditions.

    Half come from the experiments' sampling law, half from unrestricted
    draws with at most three users per MAC (longer loops, tighter counts).
    """
    K = draw(st.integers(1, K_max))
    M = draw(st.integers(1, M_max))
    if draw(st.booleans()):
        config = sample_dof_tuple(K, M, draw(st.integers(0, 2**32 - 1)))
    else:
        config = draw(configs(K_max=K, M_max=M, users_max=3))
    try:
        ok = check_theorem1(config).closed_form_feasible
    except UnseparableTailError:
        ok = False
    from hypothesis import assume

    assume(ok)
    return config


def random_feasible(n, seed, K_max=5, M_max=6):
    """``n`` feasible configurations, reproducible in ``seed``.

    Alternates between the experiments' sampling law and a law with few
    users carrying many streams each.
    """
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        K = int(rng.integers(1, K_max + 1))
        M = int(rng.integers(1, M_max + 1))
        if len(out) % 2:
            # few users with many streams each: long loops and tight counts
            dof = [rng.integers(1, M + 1, size=int(rng.integers(1, min(M, 3) + 1))).tolist()
                   for _ in range(K)]
            config = make_config(K, M, [len(r) for r in dof], dof)
        else:
            config = sample_dof_tuple(K, M, int(rng.integers(2**63 - 1)))
        try:
            if check_theorem1(config).closed_form_feasible:
                out.append(config)
        except UnseparableTailError:
            pass
    return out
