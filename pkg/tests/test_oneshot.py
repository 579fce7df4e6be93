from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest

from ndtlab.bounds import corner_ndt
from ndtlab.core import ChannelState, DegenerateChannel, DomainError, NetworkConfig, discrete_cache_grid
from ndtlab.oneshot import (
    Region,
    build_schedule,
    cache_placement,
    classify_region,
    delta_man,
    delta_os,
    phase1_beamformers,
    region_ndt,
    rn_transmit_counts,
    run_oneshot,
    subpacketize,
)


def test_delta_man_examples():
    for M in (1, 3, 7):
        assert delta_man(1, M) == 0
    assert delta_man(Fraction(1, 2), 4) == Fraction(2, 3)
    assert delta_man(Fraction(1, 3), 3) == 1


@pytest.mark.parametrize(
    "K,M,mu,expected",
    [
        (2, 2, Fraction(1, 2), Fraction(5, 4)),
        (1, 2, Fraction(1, 2), Fraction(1)),
        (2, 4, Fraction(1, 2), Fraction(1)),
    ],
)
def test_delta_os_examples(K, M, mu, expected):
    assert delta_os(NetworkConfig(K, M, mu)) == expected


def test_delta_os_off_grid_rejected():
    with pytest.raises(DomainError):
        delta_os(NetworkConfig(2, 2, Fraction(1, 3)))


def test_delta_os_corners_match_corner_ndt():
    for K in range(1, 9):
        for M in range(1, 9):
            assert delta_os(NetworkConfig(K, M, 0)) == corner_ndt(0, K, M)
            assert delta_os(NetworkConfig(K, M, 1)) == corner_ndt(1, K, M)


@pytest.mark.parametrize(
    "K,M,mu,region",
    [
        (2, 4, Fraction(1, 2), Region.A),
        (1, 3, Fraction(1, 3), Region.B),
        (3, 2, Fraction(1, 2), Region.C),
    ],
)
def test_classify_region_examples(K, M, mu, region):
    assert classify_region(NetworkConfig(K, M, mu)) is region


def test_region_formula_consistency():
    for K in range(1, 11):
        for M in range(1, 11):
            for mu in discrete_cache_grid(M)[1:-1]:
                cfg = NetworkConfig(K, M, mu)
                assert region_ndt(classify_region(cfg), cfg) == delta_os(cfg), cfg


def test_subpacketize_two_by_two():
    c = subpacketize(NetworkConfig(2, 2, Fraction(1, 2)))
    assert (c.psi, c.gamma, c.symbols_per_file, c.T1, c.N_UE, c.psi_prime, c.T2) == (1, 2, 4, 2, 1, 2, 3)
    assert c.total_T == 5 and c.ndt == Fraction(5, 4)


def test_subpacketize_single_user_two_relays():
    c = subpacketize(NetworkConfig(1, 2, Fraction(1, 2)))
    assert (c.psi, c.gamma, c.symbols_per_file, c.T1, c.N_UE, c.T2) == (1, 1, 2, 1, 1, 1)


def test_subpacketize_single_user_three_relays():
    c = subpacketize(NetworkConfig(1, 3, Fraction(1, 3)))
    assert (c.gamma, c.symbols_per_file, c.T1, c.N_UE, c.T2) == (1, 3, 3, 3, 0)
    assert c.ndt == 1


def test_cache_placement_full_cache():
    cfg = NetworkConfig(2, 2, 1)
    placement = cache_placement(cfg)
    for m in (1, 2):
        assert all(sym.rn_subset == (1, 2) for sym in placement[m])
    assert placement[1] == placement[2]


def test_cache_placement_sizes():
    cfg = NetworkConfig(3, 4, Fraction(1, 2))
    c = subpacketize(cfg)
    placement = cache_placement(cfg)
    per_file = Fraction(len(placement[1]), cfg.N)
    assert per_file / (c.symbols_per_file * c.frag_factor) == cfg.mu


def test_schedule_matches_formula_small():
    for K in range(1, 5):
        for M in range(1, 5):
            for mu in discrete_cache_grid(M):
                cfg = NetworkConfig(K, M, mu)
                plan = build_schedule(cfg)
                c = plan.counts
                assert Fraction(len(plan.steps), c.frag_factor * c.symbols_per_file) == delta_os(cfg)


def test_schedule_first_step_two_by_two():
    step = build_schedule(NetworkConfig(2, 2, Fraction(1, 2))).steps[0]
    assert step.phase == 1
    assert (step.S_U, step.S_R, step.S_R_prime) == ((1,), (1, 2), (1,))
    assert step.rn_symbols[1].to_list() == [3, [2], [1], 1]
    assert step.rn_symbols[2].to_list() == [4, [1], [1], 1]
    assert step.ue_symbols[1].file == 1


def test_schedule_phases_sequential():
    plan = build_schedule(NetworkConfig(3, 4, Fraction(1, 2)))
    phases = [s.phase for s in plan.steps]
    assert phases == sorted(phases)
    assert len(plan.phase1) == plan.counts.T1 * plan.counts.frag_factor


def test_schedule_delivers_every_uncached_symbol_once():
    cfg = NetworkConfig(3, 3, Fraction(1, 3))
    plan = build_schedule(cfg)
    placement = cache_placement(cfg, plan.counts.frag_factor)
    ue_got = [(k, s) for st in plan.steps for k, s in st.ue_symbols.items()]
    assert len(ue_got) == len(set(ue_got))
    for k, s in ue_got:
        assert s.file == k
    rn_got = [(m, s) for st in plan.steps for m, s in st.rn_symbols.items()]
    assert len(rn_got) == len(set(rn_got))
    for m, s in rn_got:
        assert s.file == cfg.K + m and s not in placement[m]


def test_schedule_to_dict_shape():
    d = build_schedule(NetworkConfig(1, 2, Fraction(1, 2))).to_dict()
    assert [s["t"] for s in d["steps"]] == [0, 1]
    sym = d["steps"][0]["rn_symbols"]["1"]
    assert len(sym) == 4 and isinstance(sym[1], list)


def test_rn_transmit_counts_cover_phase_one():
    plan = build_schedule(NetworkConfig(2, 2, Fraction(1, 2)))
    counts = rn_transmit_counts(plan)
    assert sum(counts.values()) >= len(plan.phase1)


def test_phase1_identical_users_degenerate():
    cfg = NetworkConfig(2, 4, Fraction(1, 2))
    step = build_schedule(cfg).steps[0]
    assert len(step.S_U) == 2
    rng = np.random.default_rng(3)
    H = rng.standard_normal((2, 4)) + 1j * rng.standard_normal((2, 4))
    H[1] = H[0]
    g = np.array([1.0 + 0.5j, 1.0 + 0.5j])
    f = rng.standard_normal(4) + 0j
    with pytest.raises(DegenerateChannel):
        phase1_beamformers(step, ChannelState(0, f, g, H))


@pytest.mark.parametrize(
    "K,M,mu,T,ndt",
    [
        (1, 2, Fraction(1, 2), 2, Fraction(1)),
        (2, 2, Fraction(1, 2), 5, Fraction(5, 4)),
        (1, 3, Fraction(1, 3), 3, Fraction(1)),
        (2, 4, Fraction(1, 2), 6, Fraction(1)),
        (2, 2, Fraction(0), 4, Fraction(4)),
        (2, 2, Fraction(1), 1, Fraction(1)),
    ],
)
def test_run_oneshot_traces(K, M, mu, T, ndt):
    for seed in range(5):
        trace = run_oneshot(NetworkConfig(K, M, mu), seed)
        assert trace.passed
        assert trace.T == T and trace.ndt == ndt


def test_run_oneshot_deterministic():
    cfg = NetworkConfig(3, 4, Fraction(1, 2))
    a, b = run_oneshot(cfg, 11), run_oneshot(cfg, 11)
    assert a.to_dict() == b.to_dict()
    assert all(np.array_equal(x.H, y.H) for x, y in zip(a.channels, b.channels))
