import dataclasses
import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from iac.model import UserId, make_config, sample_channels, total_dof
from iac.planner import build_alignment_plan
from iac.solver import solve_all
from iac.verify import (
    achieved_dof,
    dimension_budget,
    independence_margins,
    signal_rank_check,
    verify,
    zf_residual,
)

from conftest import feasible_configs, random_feasible


def solved(config, seed=1):
    ch = sample_channels(config, seed)
    return solve_all(config, ch, seed), ch


def with_arrays(tx, precoders=None, receivers=None):
    return dataclasses.replace(
        tx,
        precoders={u: np.array(V) for u, V in (precoders or tx.precoders).items()},
        receivers={k: np.array(U) for k, U in (receivers or tx.receivers).items()},
        interference_bases={k: np.array(B) for k, B in tx.interference_bases.items()},
    )


def random_orthonormal(rng, M, n):
    Z = rng.standard_normal((M, n)) + 1j * rng.standard_normal((M, n))
    return np.linalg.qr(Z)[0]


def test_zf_residual_c8(c8):
    tx, ch = solved(c8)
    assert zf_residual(tx, ch, c8) < 1e-8


def test_zf_residual_random_transceivers(c8):
    tx, ch = solved(c8)
    rng = np.random.default_rng(0)
    rand = with_arrays(
        tx,
        precoders={u: random_orthonormal(rng, 4, V.shape[1]) for u, V in tx.precoders.items()},
        receivers={k: random_orthonormal(rng, 4, U.shape[1]) for k, U in tx.receivers.items()},
    )
    assert zf_residual(rand, ch, c8) > 1e-2


def test_zf_residual_single_mac():
    c = make_config(1, 2, (1,), ([2],))
    tx, ch = solved(c)
    assert zf_residual(tx, ch, c) == 0.0


def test_signal_ranks_c8(c8):
    tx, ch = solved(c8)
    assert signal_rank_check(tx, ch, c8) == [(2, 2), (2, 2), (4, 4)]


def test_signal_ranks_c4(c4):
    tx, ch = solved(c4)
    assert [r for r, _ in signal_rank_check(tx, ch, c4)] == [1, 1, 2]


def test_zeroed_stream_costs_one_rank(c8):
    tx, ch = solved(c8)
    pre = {u: np.array(V) for u, V in tx.precoders.items()}
    pre[UserId(3, 2)][:, 0] = 0
    ranks = signal_rank_check(with_arrays(tx, precoders=pre), ch, c8)
    assert ranks[2] == (3, 4)
    assert ranks[:2] == [(2, 2), (2, 2)]


def test_dimension_budget(c8, c4):
    checks = dimension_budget(c8, build_alignment_plan(c8))
    assert [(c.lhs, c.rhs, c.holds) for c in checks] == [(4, 4, True), (4, 4, True)]
    checks = dimension_budget(c4, build_alignment_plan(c4))
    assert [(c.lhs, c.rhs) for c in checks] == [(2, 2), (2, 2)]
    trivial = make_config(3, 4, (1, 1, 1), ([1], [1], [1]))
    assert dimension_budget(trivial, build_alignment_plan(trivial)) == []


def test_achieved_dof_examples(c8, c4):
    for config, expected in ((c8, 8), (c4, 4)):
        tx, ch = solved(config)
        assert achieved_dof(tx, ch, config) == expected == 2 * config.M


def test_defective_receiver_loses_its_streams(c8):
    tx, ch = solved(c8)
    rx = {k: np.array(U) for k, U in tx.receivers.items()}
    rx[2] = random_orthonormal(np.random.default_rng(1), 4, 2)
    assert achieved_dof(with_arrays(tx, receivers=rx), ch, c8) == 8 - c8.D(2)


def test_report_serializes(c8):
    tx, ch = solved(c8)
    report = verify(tx, ch, c8)
    data = json.loads(json.dumps(report.to_dict()))
    assert data["passed"] and data["achieved_total_dof"] == 8
    assert "PASS" in report.table()


@given(feasible_configs(), st.integers(0, 10**6))
def test_end_to_end_soundness(config, seed):
    ch = sample_channels(config, seed)
    tx = solve_all(config, ch, seed)
    report = verify(tx, ch, config)
    assert report.max_zf_residual < 1e-8
    assert all(report.ranks_ok)
    assert report.achieved_total_dof == total_dof(config)
    assert all(s >= 0 for s in report.min_singular_values)


@pytest.mark.slow
def test_end_to_end_soundness_thousand_instances():
    failures = []
    for i, config in enumerate(random_feasible(1000, seed=476)):
        ch = sample_channels(config, i)
        report = verify(solve_all(config, ch, i), ch, config)
        if not (report.max_zf_residual < 1e-8 and all(report.ranks_ok)
                and report.achieved_total_dof == total_dof(config)):
            failures.append(str(config))
    assert failures == []


@given(feasible_configs(), st.integers(0, 10**6),
       st.complex_numbers(min_magnitude=1e-3, max_magnitude=1e3, allow_nan=False, allow_infinity=False))
def test_residual_scale_invariance(config, seed, factor):
    ch = sample_channels(config, seed)
    tx = solve_all(config, ch, seed)
    assert abs(zf_residual(tx, ch, config) - zf_residual(tx, ch.scaled(factor), config)) < 1e-12


@given(feasible_configs(), st.integers(0, 10**6))
def test_achieved_never_exceeds_total(config, seed):
    tx, ch = solved(config, seed)
    rng = np.random.default_rng(seed)
    rx = {k: random_orthonormal(rng, config.M, U.shape[1]) for k, U in tx.receivers.items()}
    assert 0 <= achieved_dof(with_arrays(tx, receivers=rx), ch, config) <= total_dof(config)


def test_independence_margins_c8(c8):
    tx, ch = solved(c8)
    assert min(independence_margins(tx, ch, c8)) > 1e-6
