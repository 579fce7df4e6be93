from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest

from ndtlab.core import ChannelState, DegenerateChannel, NetworkConfig, rn, ue
from ndtlab.ia import (
    IA_POINTS,
    SymbolRef,
    ia22_precoders,
    ia22_run,
    ia22_spec,
    ia31_precoders,
    ia31_run,
    ia31_spec,
    ia_point,
)
from ndtlab.verify import check_alignment, check_decodability, draw_state, effective_matrix

S = SymbolRef


def _channel(K, M, seed=0):
    return draw_state(np.random.default_rng(seed), 0, K, M)


def test_ia31_constant_channel_degenerate():
    ch = ChannelState(0, np.ones(1, complex), np.ones(3, complex), np.ones((3, 1), complex))
    with pytest.raises(DegenerateChannel):
        ia31_precoders(ch)


def test_ia22_collinear_pair_degenerate():
    ch = _channel(2, 2, 4)
    H = ch.H.copy()
    H[1, 0] = ch.g[1] * H[0, 0] / ch.g[0]
    with pytest.raises(DegenerateChannel):
        ia22_precoders(ChannelState(0, ch.f, ch.g, H), factor_seed=1)


def test_ia31_zero_forcing_single_use():
    ch = _channel(3, 1, 5)
    frame = ia31_precoders(ch)
    spec = ia31_spec()
    for sym, targets in spec.zf_map.items():
        for rx in targets:
            k = rx.index - 1
            seen = ch.g[k] * frame.nu.get(sym, 0) + ch.H[k, 0] * frame.beta.get((sym, 1), 0)
            size = abs(frame.nu.get(sym, 0)) + abs(frame.beta.get((sym, 1), 0))
            assert abs(seen) < 1e-10 * size


def test_ia22_zero_forcing_single_use():
    ch = _channel(2, 2, 6)
    frame = ia22_precoders(ch, factor_seed=9)
    for sym, targets in ia22_spec().zf_map.items():
        for rx in targets:
            k = rx.index - 1
            seen = ch.g[k] * frame.nu.get(sym, 0) + sum(
                ch.H[k, m - 1] * frame.beta.get((sym, m), 0) for m in (1, 2)
            )
            size = abs(frame.nu.get(sym, 0)) + sum(abs(frame.beta.get((sym, m), 0)) for m in (1, 2))
            assert abs(seen) < 1e-10 * size


def test_ia22_random_factors_unit_modulus():
    frame = ia22_precoders(_channel(2, 2, 1), factor_seed=3)
    assert len(frame.random_factors) == 8
    assert all(abs(abs(c) - 1) < 1e-12 for c in frame.random_factors.values())
    again = ia22_precoders(_channel(2, 2, 1), factor_seed=3)
    assert again.random_factors == frame.random_factors


def test_ia31_alignment_first_layer():
    trace = ia31_run(2)
    mat = trace.matrices()[ue(1)]
    report = check_alignment(mat, [[S(4, 5), S(2, 4)]])
    assert report.passed and report.max_residual < 1e-10


def test_ia31_run():
    for seed in range(10):
        trace = ia31_run(seed)
        assert trace.passed
        assert trace.T == 8 and trace.ndt == Fraction(8, 5)
        for k in (1, 2, 3):
            assert trace.reports[ue(k)].rank == 8 and trace.reports[ue(k)].columns == 8
        assert trace.extra_checks["rn_rank_within_4_uses"]
        assert trace.zf_report.max_residual < 1e-9


def test_ia22_run():
    for seed in range(10):
        trace = ia22_run(seed)
        assert trace.passed
        assert trace.T == 12 and trace.ndt == Fraction(4, 3)
        for k in (1, 2):
            assert trace.reports[ue(k)].rank == 12 and trace.reports[ue(k)].columns == 12
        for m in (1, 2):
            assert trace.reports[rn(m)].rank == 12


def test_runs_deterministic():
    assert ia31_run(17).to_dict() == ia31_run(17).to_dict()
    assert ia22_run(17).to_dict() == ia22_run(17).to_dict()


def test_frames_scale_invariant():
    trace = ia22_run(4)
    rng = np.random.default_rng(0)
    scaled = [f.scaled(complex(rng.standard_normal() + 1j * rng.standard_normal())) for f in trace.frames]
    symbols = sorted({s for f in trace.frames for s in f.symbols()})
    for rx, spec in trace.spec.receivers.items():
        base = effective_matrix(trace.frames, trace.channels, rx, symbols, spec.cache)
        other = effective_matrix(scaled, trace.channels, rx, symbols, spec.cache)
        a = check_decodability(base, spec.desired, spec.groups)
        b = check_decodability(other, spec.desired, spec.groups)
        assert a.rank == b.rank and a.verdict == b.verdict == "pass"


def test_degenerate_draws_rare():
    rng = np.random.default_rng(2024)
    failures = 0
    for _ in range(10_000):
        try:
            ia31_precoders(draw_state(rng, 0, 3, 1))
        except DegenerateChannel:
            failures += 1
    assert failures < 100
    failures = 0
    for i in range(10_000):
        try:
            ia22_precoders(draw_state(rng, 0, 2, 2), factor_seed=i)
        except DegenerateChannel:
            failures += 1
    assert failures < 100


def test_ia_points_lookup():
    assert IA_POINTS[(3, 1)] == (Fraction(4, 5), Fraction(8, 5))
    assert ia_point(NetworkConfig(2, 2, Fraction(4, 9))) == Fraction(4, 3)
    assert ia_point(NetworkConfig(3, 1, Fraction(1, 2))) is None
